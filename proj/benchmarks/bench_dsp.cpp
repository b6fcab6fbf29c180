// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "cvhd/dsp_chain.hpp"
#include "cvhd/rng.hpp"
#include "cvhd/trace_synth.hpp"

using namespace cvhd;

namespace {
HomodyneTrace noise_trace(std::size_t n, double dt) {
  CounterRng rng(CounterRng::derive_key(1, CounterRng::kTest, n));
  HomodyneTrace t;
  t.dt = dt;
  t.t_start = -1.75e-6;
  t.samples.resize(n);
  for (auto& v : t.samples) v = rng.gaussian();
  return t;
}
}  // namespace

static void BM_ApplyBandwidth(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  HomodyneTrace t = noise_trace(n, 2e-10);
  const ButterworthSpec spec{151e6, 1.0};
  for (auto _ : state) {
    HomodyneTrace out = dsp::apply_bandwidth(t, spec);
    benchmark::DoNotOptimize(out.samples.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ApplyBandwidth)->Arg(1250)->Arg(6250)->Arg(25000);

static void BM_Decimate(benchmark::State& state) {
  HomodyneTrace t = noise_trace(6250, 2e-10);
  CounterRng rng(CounterRng::derive_key(2, CounterRng::kTest, 0));
  for (auto _ : state) {
    HomodyneTrace out = dsp::decimate(t, static_cast<std::size_t>(state.range(0)), rng);
    benchmark::DoNotOptimize(out.samples.data());
  }
}
BENCHMARK(BM_Decimate)->Arg(2)->Arg(21);

static void BM_SynthTrace(benchmark::State& state) {
  AcquisitionConfig cfg;
  cfg.n_traces = 4;
  TraceSynthesizer synth(cfg);
  std::uint64_t i = 0;
  for (auto _ : state) {
    HomodyneTrace t = synth.trace(i++ % 1024);
    benchmark::DoNotOptimize(t.samples.data());
  }
}
BENCHMARK(BM_SynthTrace);

BENCHMARK_MAIN();
