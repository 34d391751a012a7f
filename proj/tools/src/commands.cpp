// SPDX-License-Identifier: Apache-2.0
#include "hpcsentry/app/commands.hpp"

#include <map>

#include "hpcsentry/error.hpp"
#include "hpcsentry/pipeline.hpp"

namespace hpcsentry::app {

namespace {

std::string opt(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : "none"; }
std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : "none"; }

std::vector<Trace> load_all(const std::vector<std::filesystem::path>& paths) {
  std::vector<Trace> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(load_trace(p.string()));
  return out;
}

}  // namespace

Trace cmd_gen_trace(std::string_view profile, std::size_t ticks, std::uint64_t seed,
                    const std::filesystem::path& out_path) {
  Trace t = generate_trace(parse_profile(profile), ticks, seed);
  save_trace(out_path.string(), t);
  return t;
}

TrainOutputs cmd_train(const std::vector<std::filesystem::path>& baseline_traces,
                       const std::vector<std::filesystem::path>& disk_traces, const AppConfig& config,
                       const std::filesystem::path& out_dir) {
  if (disk_traces.empty()) {
    throw Error(ErrorCode::InvalidArgument, "train needs at least one disk-encryption trace for the templates");
  }
  const auto baseline = load_all(baseline_traces);
  const auto disk = load_all(disk_traces);

  PipelineTrainingOptions options = config.training;
  options.stage1.seed = config.seed;
  options.stage2.seed = config.seed + 1;

  TrainOutputs out{out_dir / "manifest.txt", {}, train_pipeline(baseline, disk, options)};
  std::filesystem::create_directories(out_dir);

  RunManifest& m = out.manifest;
  m.config = out.pipeline.config;
  m.seed = config.seed;
  save_model((out_dir / m.model1).string(), out.pipeline.models.time_domain);
  save_model((out_dir / m.model2).string(), out.pipeline.models.spectral);
  write_text_file(out_dir / m.scaler, format_scaler(out.pipeline.models.time_domain.input_scaler));
  write_text_file(out_dir / m.spectral_scaler, format_scaler(out.pipeline.models.spectral.input_scaler));
  for (std::size_t i = 0; i < out.pipeline.templates.size(); ++i) {
    m.templates.push_back("template_" + std::to_string(i) + ".txt");
    save_template((out_dir / m.templates.back()).string(), out.pipeline.templates[i]);
  }
  save_manifest(out.manifest_path, m);
  return out;
}

std::string format_latency_report(const OnlineResult& result) {
  const LatencyReport& l = result.latency;
  KeyValues kv;
  kv["windows_processed"] = std::to_string(l.windows_processed);
  kv["first_stage1_window"] = opt(l.first_stage1_window);
  kv["first_stage2_window"] = opt(l.first_stage2_window);
  kv["verdict_window"] = opt(l.verdict_window);
  kv["anomaly_latency_ms"] = opt(l.anomaly_latency_ms);
  kv["verdict_latency_ms"] = opt(l.verdict_latency_ms);
  kv["final_mode"] = std::string(to_string(result.final_state.mode));
  kv["exit_code"] = std::to_string(exit_code(result.final_state.mode));
  kv["budget_ms"] = format_double(l.budget_ms);
  kv["measured.mean_processing_ms"] = format_double(l.mean_processing_ms);
  kv["measured.max_processing_ms"] = format_double(l.max_processing_ms);
  return format_key_values(kv);
}

DetectOutputs cmd_detect(const std::filesystem::path& trace_path, const std::filesystem::path& manifest_path,
                         const std::optional<std::filesystem::path>& out_dir) {
  const LoadedRun run = load_run(manifest_path);
  const Trace trace = load_trace(trace_path.string());
  DetectOutputs out;
  out.result = run_online(trace, run.models, run.templates, run.config);
  out.exit_code = exit_code(out.result.final_state.mode);
  out.event_log = format_event_log(out.result.events);
  out.latency_report = format_latency_report(out.result);
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    write_text_file(*out_dir / "events.jsonl", out.event_log);
    write_text_file(*out_dir / "latency.txt", out.latency_report);
  }
  return out;
}

AttackOutcome simulate_recovery(const AttackSimulationConfig& config, double detection_latency_ms) {
  std::vector<SimFile> files;
  files.reserve(config.files);
  for (std::size_t i = 0; i < config.files; ++i) files.push_back(make_file(i, config.file_size_bytes));

  const std::size_t n = std::min(files.size(), files_encrypted_before_stop(config.rate_files_per_s, detection_latency_ms));
  BackupLedger ledger;
  ledger.capacity_n = config.backup_capacity;
  ledger.quantum_ticks = config.quantum_ticks;
  // The alarm is raised before the first encryption, so nothing is purged.
  for (std::size_t i = 0; i < n; ++i) {
    ledger = record_open(std::move(ledger), files[i], static_cast<std::int64_t>(i));
    encrypt(files[i]);
  }
  AttackOutcome out;
  out.report = recover(ledger, files);
  out.files_total = files.size();
  out.encrypted = n;
  out.ledger_size = ledger.entries.size();
  out.text = format_report(out.report, out.files_total, out.encrypted, out.ledger_size);
  return out;
}

AttackOutcome cmd_simulate_attack(const AttackSimulationConfig& config, double detection_latency_ms,
                                  const std::optional<std::filesystem::path>& scenario_path) {
  if (!scenario_path) return simulate_recovery(config, detection_latency_ms);
  const auto steps = parse_scenario(read_text_file(*scenario_path));
  const auto r = run_scenario(steps, config.backup_capacity, config.quantum_ticks, config.file_size_bytes);
  AttackOutcome out;
  out.report = r.report;
  out.files_total = r.files.size();
  out.encrypted = r.encrypted.size();
  out.ledger_size = r.ledger.entries.size();
  out.text = format_report(out.report, out.files_total, out.encrypted, out.ledger_size);
  return out;
}

std::string cmd_report(const std::filesystem::path& run_dir) {
  const std::string log = read_text_file(run_dir / "events.jsonl");
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  std::size_t pos = 0;
  while (pos < log.size()) {
    std::size_t eol = log.find('\n', pos);
    if (eol == std::string::npos) eol = log.size();
    const std::string_view line(log.data() + pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    ++counts[std::string(to_string(parse_json_line(line).kind))];
    ++total;
  }
  KeyValues kv;
  kv["events"] = std::to_string(total);
  for (const auto& [kind, n] : counts) kv["events." + kind] = std::to_string(n);
  if (std::filesystem::exists(run_dir / "latency.txt")) {
    for (const auto& [k, v] : parse_key_values(read_text_file(run_dir / "latency.txt"))) kv["latency." + k] = v;
  }
  return format_key_values(kv);
}

}  // namespace hpcsentry::app
