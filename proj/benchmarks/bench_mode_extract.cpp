// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "cvhd/mode_extract.hpp"
#include "cvhd/rng.hpp"

using namespace cvhd;

namespace {
std::vector<HomodyneTrace> noise_ensemble(std::size_t count, std::size_t len) {
  std::vector<HomodyneTrace> traces(count);
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng(CounterRng::derive_key(3, CounterRng::kTest, i));
    traces[i].dt = 2e-10;
    traces[i].t_start = -1.25e-6;
    traces[i].trace_id = i;
    traces[i].samples.resize(len);
    for (auto& v : traces[i].samples) v = rng.gaussian();
  }
  return traces;
}
}  // namespace

static void BM_AutocorrAccumulate(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto traces = noise_ensemble(256, len);
  for (auto _ : state) {
    AutocorrAccumulator acc;
    for (const auto& t : traces) acc.add(t);
    benchmark::DoNotOptimize(acc.count());
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_AutocorrAccumulate)->Arg(60)->Arg(312)->Arg(1250)->Unit(benchmark::kMillisecond);

static void BM_DominantMode(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto traces = noise_ensemble(512, len);
  AutocorrAccumulator acc;
  for (const auto& t : traces) acc.add(t);
  // A clean spike on top of the noise floor keeps the iteration count realistic.
  AutocorrMatrix k = acc.finalize();
  Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(len), 0.0, 1.0);
  u.normalize();
  k.entries += 8.0 * u * u.transpose();
  for (auto _ : state) {
    DominantModeResult dom = dominant_mode(k);
    benchmark::DoNotOptimize(dom.eigenvalue);
  }
  state.SetLabel("power iteration");
}
BENCHMARK(BM_DominantMode)->Arg(312)->Arg(1250)->Unit(benchmark::kMillisecond);
