// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hpcsentry/error.hpp"
#include "hpcsentry/telemetry.hpp"

namespace hpcsentry {
namespace {

// Per-channel burst weights. Ransomware bursts lean on the cache; the disk
// encryption family leans on branches (table-driven tweak computation).
constexpr std::array<double, kChannels> kEncryptWeights{1.0, 1.2, 1.5, 0.9, 0.8};
constexpr std::array<double, kChannels> kDiskWeights{1.0, 0.8, 0.6, 1.1, 1.3};

std::uint64_t mix_seed(std::uint64_t seed, Regime regime) {
  return seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(regime) + 1;
}

std::uint64_t to_count(double rate) {
  return rate <= 0.0 ? 0 : static_cast<std::uint64_t>(std::llround(rate));
}

}  // namespace

Trace generate_trace(Regime regime, std::size_t duration_ticks, std::uint64_t seed,
                     const SyntheticProfile& p) {
  if (regime == Regime::Unknown) throw Error(ErrorCode::UnknownProfile, "no generator for regime Unknown");
  if (duration_ticks == 0) throw Error(ErrorCode::InvalidArgument, "duration_ticks must be >= 1");

  std::mt19937_64 rng(mix_seed(seed, regime));
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Trace trace;
  trace.sampling_interval_ms = kDefaultIntervalMs;
  trace.regime_label = regime;
  trace.privilege = regime == Regime::DiskEncryption ? Privilege::Administrator : Privilege::User;
  trace.source = "synthetic:" + std::string(to_string(regime)) + ":" + std::to_string(seed);
  trace.samples.resize(duration_ticks);

  const double two_pi = 2.0 * std::numbers::pi;

  // Regime-level draws happen before any per-tick noise so that the noise
  // stream is aligned across regimes for the same seed.
  std::size_t burst_phase = 0;
  std::vector<double> wander_period, wander_phase;
  if (regime == Regime::RepeatedEncryption) {
    burst_phase = static_cast<std::size_t>(unit(rng) * static_cast<double>(p.burst_period)) % p.burst_period;
  } else if (regime == Regime::HighCompute) {
    for (std::size_t j = 0; j < p.compute_components; ++j) {
      wander_period.push_back(700.0 + 1800.0 * unit(rng));
      wander_phase.push_back(two_pi * unit(rng));
    }
  }

  const double jitter = regime == Regime::HighCompute ? p.jitter * p.compute_jitter_scale : p.jitter;

  for (std::size_t t = 0; t < duration_ticks; ++t) {
    const double tt = static_cast<double>(t);
    ChannelValues level{};
    switch (regime) {
      case Regime::Baseline:
        break;
      case Regime::RepeatedEncryption: {
        const bool on = (t + burst_phase) % p.burst_period < p.burst_width;
        for (std::size_t c = 0; c < kChannels; ++c) level[c] = on ? p.burst_amplitude * kEncryptWeights[c] : 0.0;
        break;
      }
      case Regime::HighCompute: {
        double wander = 0.0;
        for (std::size_t j = 0; j < wander_period.size(); ++j) {
          wander += p.compute_wander * std::sin(two_pi * tt / wander_period[j] + wander_phase[j]);
        }
        level.fill(p.compute_elevation + wander);
        break;
      }
      case Regime::DiskEncryption: {
        const double envelope =
            p.disk_amplitude_low + (p.disk_amplitude_high - p.disk_amplitude_low) *
                                       (0.5 - 0.5 * std::cos(two_pi * tt / static_cast<double>(p.disk_envelope_period)));
        const std::size_t in_period = t % p.disk_period;
        const double ramp = in_period < p.disk_ramp
                                ? static_cast<double>(in_period + 1) / static_cast<double>(p.disk_ramp)
                                : 0.0;
        for (std::size_t c = 0; c < kChannels; ++c) level[c] = envelope * ramp * kDiskWeights[c];
        break;
      }
      case Regime::Unknown:
        break;
    }

    auto& s = trace.samples[t];
    s.tick_index = t;
    s.elapsed_ms = static_cast<double>((t + 1) * static_cast<std::size_t>(trace.sampling_interval_ms));
    for (std::size_t c = 0; c < kChannels; ++c) {
      const double base = static_cast<double>(p.base_rate[c]);
      s.counts[c] = to_count(base * (1.0 + level[c] + jitter * noise(rng)));
    }
  }
  return trace;
}

}  // namespace hpcsentry
