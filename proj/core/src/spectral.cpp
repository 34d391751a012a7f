// SPDX-License-Identifier: Apache-2.0
#include "hpcsentry/spectral.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "hpcsentry/error.hpp"

namespace hpcsentry {

Spectrum::Spectrum(std::int64_t start_tick, std::size_t n_fft, std::size_t channels)
    : start_tick_(start_tick), n_fft_(n_fft), channels_(channels), amplitudes_((n_fft / 2 + 1) * channels, 0.0) {}

void fft_in_place(std::span<std::complex<double>> data) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw Error(ErrorCode::NotPowerOfTwo, "fft length " + std::to_string(n));

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const double step = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t k = 0; k < half; ++k) {
      // Direct evaluation keeps twiddle error independent of k.
      const std::complex<double> w = std::polar(1.0, step * static_cast<double>(k));
      for (std::size_t start = 0; start < n; start += len) {
        const auto u = data[start + k];
        const auto v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

namespace {

void check_sizes(const Window& window, std::size_t n_fft) {
  if (!is_power_of_two(n_fft)) throw Error(ErrorCode::NotPowerOfTwo, "n_fft " + std::to_string(n_fft));
  if (window.rows() > n_fft) {
    throw Error(ErrorCode::WindowTooLong,
                "window of " + std::to_string(window.rows()) + " rows exceeds n_fft " + std::to_string(n_fft));
  }
}

}  // namespace

std::vector<std::complex<double>> channel_transform(const Window& window, std::size_t channel, std::size_t n_fft,
                                                    bool remove_dc) {
  check_sizes(window, n_fft);
  double mean = 0.0;
  if (remove_dc && window.rows() > 0) {
    for (std::size_t r = 0; r < window.rows(); ++r) mean += window.at(r, channel);
    mean /= static_cast<double>(window.rows());
  }
  std::vector<std::complex<double>> buf(n_fft);
  for (std::size_t r = 0; r < window.rows(); ++r) buf[r] = window.at(r, channel) - mean;
  fft_in_place(buf);
  return buf;
}

Spectrum fft_window(const Window& window, std::size_t n_fft, bool remove_dc) {
  check_sizes(window, n_fft);
  Spectrum out(window.start_tick(), n_fft, window.cols());
  for (std::size_t c = 0; c < window.cols(); ++c) {
    const auto bins = channel_transform(window, c, n_fft, remove_dc);
    for (std::size_t k = 0; k < out.bins(); ++k) out.at(k, c) = std::abs(bins[k]);
  }
  return out;
}

Window spectrum_as_sequence(const Spectrum& spectrum) {
  const auto a = spectrum.amplitudes();
  return Window(spectrum.start_tick(), spectrum.bins(), spectrum.channels(), std::vector<double>(a.begin(), a.end()));
}

Spectrum sequence_as_spectrum(const Window& sequence, std::size_t n_fft) {
  if (sequence.rows() != n_fft / 2 + 1) {
    throw Error(ErrorCode::ShapeMismatch, "sequence has " + std::to_string(sequence.rows()) + " rows, n_fft " +
                                              std::to_string(n_fft) + " needs " + std::to_string(n_fft / 2 + 1));
  }
  Spectrum out(sequence.start_tick(), n_fft, sequence.cols());
  for (std::size_t k = 0; k < out.bins(); ++k) {
    for (std::size_t c = 0; c < out.channels(); ++c) out.at(k, c) = sequence.at(k, c);
  }
  return out;
}

}  // namespace hpcsentry
