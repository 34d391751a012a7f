// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <vector>

#include "hpcsentry/detector.hpp"
#include "hpcsentry/pipeline.hpp"
#include "hpcsentry/telemetry.hpp"

using namespace hpcsentry;

namespace {

// Small but real pipeline; training cost is paid once per process.
const TrainedPipeline& pipeline() {
  static const TrainedPipeline p = [] {
    const std::vector<Trace> baseline{generate_trace(Regime::Baseline, 1500, 11)};
    const std::vector<Trace> disk{generate_trace(Regime::DiskEncryption, 1500, 12)};
    PipelineTrainingOptions o;
    o.stage1.epochs = o.stage2.epochs = 3;
    return train_pipeline(baseline, disk, o);
  }();
  return p;
}

}  // namespace

static void BM_Stage1Error(benchmark::State& state) {
  const auto& p = pipeline();
  const Trace t = generate_trace(Regime::Baseline, 200, 13);
  const auto windows = windowize(t, p.models.time_domain.input_scaler, kDefaultWindowLen, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(p.models.time_domain.reconstruction_error(windows[i++ % windows.size()]));
  }
}
BENCHMARK(BM_Stage1Error);

// Every window clears stage 1, so each iteration pays for both stages.
static void BM_ProcessWindow(benchmark::State& state) {
  const auto& p = pipeline();
  PipelineConfig cfg = p.config;
  cfg.calibration_1 = make_calibration(0.0, 0.0);
  cfg.persistence_k = 1u << 30;
  const Trace t = generate_trace(Regime::RepeatedEncryption, 400, 14);
  const auto windows = windowize(t, p.models.time_domain.input_scaler, cfg.window_len, cfg.stride);
  DetectorState s = initial_state(t.privilege, p.templates.size());
  std::size_t i = 0;
  for (auto _ : state) {
    auto r = process_window(std::move(s), windows[i++ % windows.size()], p.models, p.templates, cfg);
    s = std::move(r.state);
  }
}
BENCHMARK(BM_ProcessWindow)->Unit(benchmark::kMicrosecond);
