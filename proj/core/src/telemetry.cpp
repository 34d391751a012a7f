// SPDX-License-Identifier: Apache-2.0
#include "hpcsentry/telemetry.hpp"

#include <cmath>

#include "hpcsentry/error.hpp"

namespace hpcsentry {

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::Baseline: return "Baseline";
    case Regime::RepeatedEncryption: return "RepeatedEncryption";
    case Regime::HighCompute: return "HighCompute";
    case Regime::DiskEncryption: return "DiskEncryption";
    case Regime::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::string_view to_string(Privilege privilege) noexcept {
  return privilege == Privilege::Administrator ? "Administrator" : "User";
}

Regime regime_from_string(std::string_view name) {
  for (auto r : {Regime::Baseline, Regime::RepeatedEncryption, Regime::HighCompute,
                 Regime::DiskEncryption, Regime::Unknown}) {
    if (name == to_string(r)) return r;
  }
  throw Error(ErrorCode::UnknownProfile, "unknown regime '" + std::string(name) + "'");
}

Privilege privilege_from_string(std::string_view name) {
  if (name == "User") return Privilege::User;
  if (name == "Administrator") return Privilege::Administrator;
  throw Error(ErrorCode::BadFormat, "unknown privilege '" + std::string(name) + "'");
}

void Trace::validate() const {
  if (sampling_interval_ms <= 0) {
    throw Error(ErrorCode::InvalidArgument, "sampling_interval_ms must be positive");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].tick_index != i) {
      throw Error(ErrorCode::InvalidArgument, "tick_index " + std::to_string(samples[i].tick_index) +
                                                  " at position " + std::to_string(i));
    }
    if (i > 0 && !(samples[i].elapsed_ms > samples[i - 1].elapsed_ms)) {
      throw Error(ErrorCode::NonMonotonicTime, "elapsed_ms not increasing at tick " + std::to_string(i));
    }
  }
}

bool same_content(const Trace& a, const Trace& b) noexcept {
  return a.samples == b.samples && a.sampling_interval_ms == b.sampling_interval_ms &&
         a.regime_label == b.regime_label && a.privilege == b.privilege;
}

Window::Window(std::int64_t start_tick, std::size_t rows, std::size_t cols)
    : start_tick_(start_tick), rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

Window::Window(std::int64_t start_tick, std::size_t rows, std::size_t cols, std::vector<double> values)
    : start_tick_(start_tick), rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw Error(ErrorCode::ShapeMismatch, "window needs " + std::to_string(rows_ * cols_) +
                                              " values, got " + std::to_string(values_.size()));
  }
}

bool Window::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

ChannelValues Scaler::transform(const CounterVector& counts) const noexcept {
  ChannelValues out{};
  for (std::size_t c = 0; c < kChannels; ++c) out[c] = scale(c, static_cast<double>(counts[c]));
  return out;
}

namespace {

// Welford accumulator per channel.
struct ChannelMoments {
  std::size_t n = 0;
  ChannelValues mean{};
  ChannelValues m2{};

  void push(std::size_t c, double x) noexcept {
    const double delta = x - mean[c];
    mean[c] += delta / static_cast<double>(n);
    m2[c] += delta * (x - mean[c]);
  }

  Scaler finish() const {
    if (n == 0) throw Error(ErrorCode::EmptyCorpus, "no samples to fit a scaler");
    Scaler s;
    s.mean = mean;
    for (std::size_t c = 0; c < kChannels; ++c) {
      const double sd = std::sqrt(m2[c] / static_cast<double>(n));
      s.std[c] = sd > 0.0 ? sd : 1.0;
    }
    return s;
  }
};

}  // namespace

Scaler fit_scaler(std::span<const Trace> traces) {
  ChannelMoments acc;
  for (const auto& trace : traces) {
    for (const auto& sample : trace.samples) {
      ++acc.n;
      for (std::size_t c = 0; c < kChannels; ++c) acc.push(c, static_cast<double>(sample.counts[c]));
    }
  }
  return acc.finish();
}

Scaler fit_scaler(std::span<const Window> sequences) {
  ChannelMoments acc;
  for (const auto& seq : sequences) {
    if (seq.cols() != kChannels) {
      throw Error(ErrorCode::ShapeMismatch, "scaler expects " + std::to_string(kChannels) + " columns");
    }
    for (std::size_t r = 0; r < seq.rows(); ++r) {
      ++acc.n;
      for (std::size_t c = 0; c < kChannels; ++c) acc.push(c, seq.at(r, c));
    }
  }
  return acc.finish();
}

Window apply_scaler(const Window& sequence, const Scaler& scaler) {
  if (sequence.cols() != kChannels) {
    throw Error(ErrorCode::ShapeMismatch, "scaler expects " + std::to_string(kChannels) + " columns");
  }
  Window out(sequence.start_tick(), sequence.rows(), sequence.cols());
  for (std::size_t r = 0; r < sequence.rows(); ++r) {
    for (std::size_t c = 0; c < kChannels; ++c) out.at(r, c) = scaler.scale(c, sequence.at(r, c));
  }
  return out;
}

std::size_t window_count(std::size_t n, std::size_t window_len, std::size_t stride) noexcept {
  if (window_len == 0 || stride == 0 || n < window_len) return 0;
  return (n - window_len) / stride + 1;
}

Window make_window(const Trace& trace, const Scaler& scaler, std::size_t start, std::size_t window_len) {
  if (start + window_len > trace.size()) {
    throw Error(ErrorCode::InvalidArgument, "window runs past the end of the trace");
  }
  Window w(static_cast<std::int64_t>(start), window_len, kChannels);
  for (std::size_t r = 0; r < window_len; ++r) {
    const auto row = scaler.transform(trace.samples[start + r].counts);
    for (std::size_t c = 0; c < kChannels; ++c) w.at(r, c) = row[c];
  }
  return w;
}

std::vector<Window> windowize(const Trace& trace, const Scaler& scaler, std::size_t window_len,
                              std::size_t stride) {
  if (window_len == 0 || stride == 0) {
    throw Error(ErrorCode::InvalidArgument, "window_len and stride must be >= 1");
  }
  const std::size_t count = window_count(trace.size(), window_len, stride);
  std::vector<Window> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(make_window(trace, scaler, i * stride, window_len));
  return out;
}

}  // namespace hpcsentry
