// SPDX-License-Identifier: Apache-2.0
#include <csignal>
#include <iostream>

#include "CLI11.hpp"

#include "hpcsentry/app/commands.hpp"
#include "hpcsentry/app/config.hpp"
#include "hpcsentry/app/service.hpp"
#include "hpcsentry/error.hpp"

using namespace hpcsentry;
using namespace hpcsentry::app;

namespace {

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage hardware-counter ransomware detector"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string manifest_path;
  app.add_option("--seed", seed, "Random seed (overrides the config file)");
  app.add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--manifest", manifest_path, "Run manifest written by `train`");

  auto load_app_config = [&] {
    AppConfig c = config_path.empty() ? AppConfig{} : load_config(config_path);
    if (seed) c.seed = *seed;
    return c;
  };
  auto need_manifest = [&] {
    if (manifest_path.empty()) throw CLI::RequiredError("--manifest");
    return manifest_path;
  };

  // gen-trace
  auto* gen = app.add_subcommand("gen-trace", "Write a synthetic counter trace");
  std::string profile = "baseline";
  std::size_t ticks = 5000;
  std::string out_path;
  gen->add_option("--profile", profile, "baseline | repeated_encryption | high_compute | disk_encryption");
  gen->add_option("--ticks", ticks, "Number of 10 ms samples")->check(CLI::PositiveNumber);
  gen->add_option("--out", out_path, "Output trace path")->required();

  // train
  auto* train = app.add_subcommand("train", "Fit both stages, calibrate thresholds, build templates");
  std::vector<std::string> baseline_paths, disk_paths;
  std::string out_dir;
  train->add_option("--baseline", baseline_paths, "Baseline traces")->required()->check(CLI::ExistingFile);
  train->add_option("--disk", disk_paths, "Disk-encryption traces for templates")->check(CLI::ExistingFile);
  train->add_option("--out", out_dir, "Output directory")->required();

  // detect
  auto* detect = app.add_subcommand("detect", "Replay a trace through the detector");
  std::string trace_path, detect_out;
  detect->add_option("--trace", trace_path, "Trace to replay")->required()->check(CLI::ExistingFile);
  detect->add_option("--out", detect_out, "Directory for events.jsonl and latency.txt");
  bool print_events = false;
  detect->add_flag("--events", print_events, "Print the event log instead of the latency report");

  // simulate-attack
  auto* sim = app.add_subcommand("simulate-attack", "Simulate encryption and backup recovery");
  double latency_ms = 5313.0203;
  std::string scenario_path;
  std::optional<std::size_t> capacity;
  sim->add_option("--latency-ms", latency_ms, "Detection latency that stops the attack");
  sim->add_option("--scenario", scenario_path, "tick,action,file_id CSV")->check(CLI::ExistingFile);
  sim->add_option("--capacity", capacity, "Backup ledger capacity");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the detection API");
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::string trace_dir;
  bool simulate_attack = false;
  serve->add_option("--bind", bind, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--trace-dir", trace_dir, "Directory of traces replayable by trace_id")->check(CLI::ExistingDirectory);
  serve->add_flag("--simulate-attack", simulate_attack, "Report backup recovery after a ransomware verdict");

  // report
  auto* report = app.add_subcommand("report", "Summarise a detect output directory");
  std::string run_dir;
  report->add_option("--run", run_dir, "Directory written by detect --out")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      const Trace t = cmd_gen_trace(profile, ticks, seed.value_or(load_app_config().seed), out_path);
      std::cout << "wrote " << t.size() << " samples to " << out_path << '\n';
    } else if (*train) {
      std::vector<std::filesystem::path> b(baseline_paths.begin(), baseline_paths.end());
      std::vector<std::filesystem::path> d(disk_paths.begin(), disk_paths.end());
      const auto out = cmd_train(b, d, load_app_config(), out_dir);
      std::cout << "manifest: " << out.manifest_path.string() << '\n'
                << "threshold1=" << format_double(out.manifest.config.calibration_1.threshold) << '\n'
                << "threshold2=" << format_double(out.manifest.config.calibration_2.threshold) << '\n';
    } else if (*detect) {
      const auto out = cmd_detect(trace_path, need_manifest(),
                                  detect_out.empty() ? std::nullopt : std::optional<std::filesystem::path>(detect_out));
      std::cout << (print_events ? out.event_log : out.latency_report);
      return out.exit_code;
    } else if (*sim) {
      AttackSimulationConfig c = load_app_config().attack;
      if (capacity) c.backup_capacity = *capacity;
      const auto out = cmd_simulate_attack(
          c, latency_ms, scenario_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(scenario_path));
      std::cout << out.text;
    } else if (*serve) {
      ServiceOptions o;
      if (!trace_dir.empty()) o.trace_dir = trace_dir;
      o.simulate_attack = simulate_attack;
      o.attack = load_app_config().attack;
      DetectionService service(load_run(need_manifest()), o);
      HttpServer server(service, bind, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "serving on " << bind << ':' << port << std::endl;
      server.run();
      g_server = nullptr;
      service.stop();
    } else if (*report) {
      std::cout << cmd_report(run_dir);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
