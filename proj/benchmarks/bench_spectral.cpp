// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <complex>
#include <random>
#include <vector>

#include "hpcsentry/corrmod.hpp"
#include "hpcsentry/spectral.hpp"
#include "hpcsentry/telemetry.hpp"

using namespace hpcsentry;

static void BM_FftInPlace(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  std::vector<std::complex<double>> base(n);
  for (auto& v : base) v = {d(rng), d(rng)};
  for (auto _ : state) {
    auto x = base;
    fft_in_place(x);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FftInPlace)->RangeMultiplier(2)->Range(16, 1024)->Complexity(benchmark::oNLogN);

static void BM_FftWindow(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d;
  Window w(0, kDefaultWindowLen, kChannels);
  for (auto& v : w.values()) v = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(fft_window(w, kDefaultFftSize, true));
}
BENCHMARK(BM_FftWindow);

static void BM_PearsonPush(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u;
  CumulativePearson p;
  for (auto _ : state) benchmark::DoNotOptimize(p.push(u(rng), u(rng)));
}
BENCHMARK(BM_PearsonPush);
