// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hpcsentry/app/config.hpp"
#include "hpcsentry/detector.hpp"
#include "hpcsentry/recovery.hpp"
#include "hpcsentry/telemetry.hpp"

namespace hpcsentry::app {

/// Writes a synthetic trace in the telemetry text format.
Trace cmd_gen_trace(std::string_view profile, std::size_t ticks, std::uint64_t seed,
                    const std::filesystem::path& out_path);

struct TrainOutputs {
  std::filesystem::path manifest_path;
  RunManifest manifest;
  TrainedPipeline pipeline;
};

/// Trains both stages on the baseline traces, calibrates both thresholds and
/// builds one template per disk-encryption trace. Everything lands in
/// `out_dir` next to manifest.txt. Throws Error{InvalidArgument} without a
/// disk-encryption trace.
TrainOutputs cmd_train(const std::vector<std::filesystem::path>& baseline_traces,
                       const std::vector<std::filesystem::path>& disk_traces, const AppConfig& config,
                       const std::filesystem::path& out_dir);

struct DetectOutputs {
  OnlineResult result;
  int exit_code = 0;
  std::string event_log;       // JSON lines
  std::string latency_report;  // key=value lines
};

/// Replays a trace through the detector described by the manifest. When
/// `out_dir` is given, writes events.jsonl and latency.txt there.
DetectOutputs cmd_detect(const std::filesystem::path& trace_path, const std::filesystem::path& manifest_path,
                         const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Deterministic part of the latency report, plus measured timings.
std::string format_latency_report(const OnlineResult& result);

struct AttackOutcome {
  RecoveryReport report;
  std::size_t files_total = 0;
  std::size_t encrypted = 0;
  std::size_t ledger_size = 0;
  std::string text;
};

/// Ransomware opens and encrypts files in order until it is stopped after
/// `detection_latency_ms`; every open leaves a backup in the ledger.
AttackOutcome simulate_recovery(const AttackSimulationConfig& config, double detection_latency_ms);

/// Runs a scenario CSV when given, otherwise simulate_recovery().
AttackOutcome cmd_simulate_attack(const AttackSimulationConfig& config, double detection_latency_ms,
                                  const std::optional<std::filesystem::path>& scenario_path = std::nullopt);

/// Summarises a detect output directory (events.jsonl and latency.txt).
std::string cmd_report(const std::filesystem::path& run_dir);

}  // namespace hpcsentry::app
