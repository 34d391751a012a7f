// SPDX-License-Identifier: Apache-2.0
//
// Counter traces: the sampled model, `perf stat -I` ingestion, the on-disk
// trace format, scaling and sliding windows, and a seeded workload generator.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hpcsentry {

inline constexpr std::size_t kChannels = 5;
inline constexpr std::size_t kDefaultWindowLen = 100;
inline constexpr int kDefaultIntervalMs = 10;

/// Fixed channel order shared by every trace, window and spectrum.
enum class Channel : std::uint8_t {
  Instructions = 0,
  CacheReferences = 1,
  CacheMisses = 2,
  Branches = 3,
  BranchMisses = 4,
};

/// perf event names, indexed by Channel.
inline constexpr std::array<std::string_view, kChannels> kPerfEventNames = {
    "instructions", "cache-references", "cache-misses", "branches", "branch-misses"};

/// Trace-file column names, indexed by Channel.
inline constexpr std::array<std::string_view, kChannels> kColumnNames = {
    "instructions", "cache_references", "cache_misses", "branches", "branch_misses"};

using CounterVector = std::array<std::uint64_t, kChannels>;
using ChannelValues = std::array<double, kChannels>;

struct CounterSample {
  std::uint64_t tick_index = 0;
  double elapsed_ms = 0.0;
  CounterVector counts{};

  friend bool operator==(const CounterSample&, const CounterSample&) = default;
};

enum class Regime : std::uint8_t { Baseline, RepeatedEncryption, HighCompute, DiskEncryption, Unknown };
enum class Privilege : std::uint8_t { User, Administrator };

std::string_view to_string(Regime regime) noexcept;
std::string_view to_string(Privilege privilege) noexcept;
/// Throws Error{UnknownProfile}.
Regime regime_from_string(std::string_view name);
/// Throws Error{BadFormat}.
Privilege privilege_from_string(std::string_view name);

struct Trace {
  std::vector<CounterSample> samples;
  int sampling_interval_ms = kDefaultIntervalMs;
  std::optional<Regime> regime_label;
  Privilege privilege = Privilege::User;
  std::string source;

  [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
  [[nodiscard]] bool empty() const noexcept { return samples.empty(); }

  /// Checks tick numbering, time monotonicity and the interval; throws on violation.
  void validate() const;
};

/// Same samples, interval, label and privilege. `source` is provenance only.
bool same_content(const Trace& a, const Trace& b) noexcept;

/// Row-major rows x cols block of finite reals. Time windows are
/// window_len x 5; spectra reinterpreted as sequences are (n_fft/2+1) x 5.
class Window {
 public:
  Window() = default;
  Window(std::int64_t start_tick, std::size_t rows, std::size_t cols);
  /// Throws Error{ShapeMismatch} when values.size() != rows * cols.
  Window(std::int64_t start_tick, std::size_t rows, std::size_t cols, std::vector<double> values);

  [[nodiscard]] std::int64_t start_tick() const noexcept { return start_tick_; }
  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] double at(std::size_t row, std::size_t col) const { return values_[row * cols_ + col]; }
  double& at(std::size_t row, std::size_t col) { return values_[row * cols_ + col]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::span<double> values() noexcept { return values_; }
  [[nodiscard]] bool all_finite() const noexcept;

  friend bool operator==(const Window&, const Window&) = default;

 private:
  std::int64_t start_tick_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Per-channel z-score. Channels whose fitted std is zero store std = 1.
struct Scaler {
  ChannelValues mean{};
  ChannelValues std{1.0, 1.0, 1.0, 1.0, 1.0};

  [[nodiscard]] double scale(std::size_t channel, double raw) const noexcept {
    return (raw - mean[channel]) / std[channel];
  }
  [[nodiscard]] double unscale(std::size_t channel, double scaled) const noexcept {
    return scaled * std[channel] + mean[channel];
  }
  [[nodiscard]] ChannelValues transform(const CounterVector& counts) const noexcept;

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

/// Population mean/std per channel over every sample of every trace.
/// Throws Error{EmptyCorpus} when there are no samples.
Scaler fit_scaler(std::span<const Trace> traces);

/// Scaler fit over the rows of already-shaped sequences (e.g. spectra).
Scaler fit_scaler(std::span<const Window> sequences);

/// Applies `scaler` column-wise; returns a new window.
Window apply_scaler(const Window& sequence, const Scaler& scaler);

/// Number of windows windowize produces; 0 when n < window_len.
[[nodiscard]] std::size_t window_count(std::size_t n, std::size_t window_len, std::size_t stride) noexcept;

/// One scaled window starting at `start`. Requires start + window_len <= trace.size().
Window make_window(const Trace& trace, const Scaler& scaler, std::size_t start, std::size_t window_len);

/// Sliding windows at start ticks 0, stride, 2*stride, ...
/// Throws Error{InvalidArgument} when window_len or stride is zero.
std::vector<Window> windowize(const Trace& trace, const Scaler& scaler,
                              std::size_t window_len = kDefaultWindowLen, std::size_t stride = 1);

// --- perf stat -I ingestion ------------------------------------------------

/// Parses interval-mode text: `<seconds> <value|<not counted>> <event> [ignored...]`.
/// Lines starting with '#' and blank lines are skipped. Throws Error with
/// MalformedLine / UnsupportedEvent / IncompleteGroup / NonMonotonicTime.
Trace parse_perf_interval_output(std::string_view text);

// --- trace files -------------------------------------------------------------

void write_trace(std::ostream& out, const Trace& trace);
std::string format_trace(const Trace& trace);
/// Throws Error{BadFormat} with the offending line number.
Trace read_trace(std::istream& in);
Trace parse_trace(std::string_view text);
void save_trace(const std::string& path, const Trace& trace);
Trace load_trace(const std::string& path);

// --- synthetic workloads -------------------------------------------------------

/// Shape of the synthetic regimes. Rates are per sampling interval; every
/// amplitude is a fraction of the channel's base rate.
struct SyntheticProfile {
  CounterVector base_rate{20'000'000, 400'000, 50'000, 4'000'000, 100'000};
  double jitter = 0.02;  // std of the baseline noise

  std::size_t burst_period = 50;  // repeated encryption
  std::size_t burst_width = 12;
  double burst_amplitude = 0.06;

  double compute_elevation = 0.08;       // high compute
  double compute_wander = 0.004;         // amplitude of each aperiodic component
  std::size_t compute_components = 3;
  double compute_jitter_scale = 0.6;     // core saturation damps scheduler noise

  std::size_t disk_period = 32;  // disk encryption
  std::size_t disk_ramp = 20;
  double disk_amplitude_low = 0.05;
  double disk_amplitude_high = 0.14;
  std::size_t disk_envelope_period = 800;
};

/// Deterministic for a given (regime, duration_ticks, seed, profile).
/// Throws Error{UnknownProfile} for Regime::Unknown, Error{InvalidArgument}
/// for duration_ticks == 0.
Trace generate_trace(Regime regime, std::size_t duration_ticks, std::uint64_t seed,
                     const SyntheticProfile& profile = {});

}  // namespace hpcsentry
