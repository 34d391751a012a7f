// SPDX-License-Identifier: Apache-2.0
//
// Tool configuration and the run manifest written by `train`. Both are
// plain key=value text; see docs/config.md for the keys.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hpcsentry/detector.hpp"
#include "hpcsentry/pipeline.hpp"
#include "hpcsentry/recovery.hpp"

namespace hpcsentry::app {

/// Ordered key=value document. '#' starts a comment line.
using KeyValues = std::map<std::string, std::string, std::less<>>;

/// Throws Error{BadFormat} with the offending line number.
KeyValues parse_key_values(std::string_view text);
std::string format_key_values(const KeyValues& kv);

/// Throw Error{Io}.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

struct AttackSimulationConfig {
  std::size_t files = 10000;
  std::uint64_t file_size_bytes = 21;
  /// 68 files in the reference detection time of 5313.0203 ms.
  double rate_files_per_s = 68.0 / 5.3130203;
  std::size_t backup_capacity = 128;
  std::int64_t quantum_ticks = kDefaultQuantumTicks;

  friend bool operator==(const AttackSimulationConfig&, const AttackSimulationConfig&) = default;
};

struct AppConfig {
  PipelineTrainingOptions training;
  AttackSimulationConfig attack;
  std::uint64_t seed = 0;
};

/// Unknown keys are rejected (Error{BadFormat}); missing keys keep defaults.
AppConfig parse_config(std::string_view text);
AppConfig load_config(const std::filesystem::path& path);
std::string format_config(const AppConfig& config);

/// Everything needed to rebuild a detector. Paths are stored relative to the
/// manifest's directory.
struct RunManifest {
  std::string model1 = "model1.txt";
  std::string model2 = "model2.txt";
  std::string scaler = "scaler.txt";
  std::string spectral_scaler = "spectral_scaler.txt";
  std::vector<std::string> templates;
  PipelineConfig config;  // calibrations included
  std::uint64_t seed = 0;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

std::string format_manifest(const RunManifest& manifest);
/// Throws Error{BadFormat}.
RunManifest parse_manifest(std::string_view text);
void save_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest load_manifest(const std::filesystem::path& path);

std::string format_scaler(const Scaler& scaler);
Scaler parse_scaler(std::string_view text);

/// A manifest resolved into models, templates and configuration.
struct LoadedRun {
  DetectorModels models;
  std::vector<ErrorTemplate> templates;
  PipelineConfig config;
  std::uint64_t seed = 0;
};

/// Loads every referenced file. Throws Error{Io} when one is missing and
/// Error{InvalidArgument} when the pieces do not fit together.
LoadedRun load_run(const std::filesystem::path& manifest_path);

/// Accepts "Baseline", "baseline", "repeated_encryption", "high-compute", ...
Regime parse_profile(std::string_view name);

}  // namespace hpcsentry::app
