// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hpcsentry/telemetry.hpp"

namespace hpcsentry {

inline constexpr std::size_t kDefaultFftSize = 128;

/// One-sided amplitude spectrum of a window, one column per channel.
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(std::int64_t start_tick, std::size_t n_fft, std::size_t channels = kChannels);

  [[nodiscard]] std::int64_t start_tick() const noexcept { return start_tick_; }
  [[nodiscard]] std::size_t n_fft() const noexcept { return n_fft_; }
  [[nodiscard]] std::size_t bins() const noexcept { return n_fft_ / 2 + 1; }
  [[nodiscard]] std::size_t channels() const noexcept { return channels_; }
  [[nodiscard]] double at(std::size_t bin, std::size_t channel) const { return amplitudes_[bin * channels_ + channel]; }
  double& at(std::size_t bin, std::size_t channel) { return amplitudes_[bin * channels_ + channel]; }
  [[nodiscard]] std::span<const double> amplitudes() const noexcept { return amplitudes_; }

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  std::int64_t start_tick_ = 0;
  std::size_t n_fft_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> amplitudes_;
};

[[nodiscard]] constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 decimation-in-time transform,
/// X[k] = sum_j x[j] exp(-2 pi i j k / n). Throws Error{NotPowerOfTwo}.
void fft_in_place(std::span<std::complex<double>> data);

/// Complex transform of one channel, zero-padded to n_fft. With `remove_dc`
/// the channel's window mean is subtracted before padding.
std::vector<std::complex<double>> channel_transform(const Window& window, std::size_t channel, std::size_t n_fft,
                                                    bool remove_dc = false);

/// Magnitudes of bins 0..n_fft/2 for each channel.
/// Throws Error{NotPowerOfTwo} or Error{WindowTooLong}.
Spectrum fft_window(const Window& window, std::size_t n_fft = kDefaultFftSize, bool remove_dc = false);

/// Bins become the sequence axis: (n_fft/2 + 1) x channels.
Window spectrum_as_sequence(const Spectrum& spectrum);

/// Inverse of spectrum_as_sequence. Throws Error{ShapeMismatch} when the row
/// count is not n_fft/2 + 1.
Spectrum sequence_as_spectrum(const Window& sequence, std::size_t n_fft);

}  // namespace hpcsentry
