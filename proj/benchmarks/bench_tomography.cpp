// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "cvhd/rng.hpp"
#include "cvhd/tomography.hpp"
#include "cvhd/trace_synth.hpp"

using namespace cvhd;

namespace {
std::vector<QuadratureSample> kitten_samples(std::size_t count) {
  const DensityMatrix rho = apply_loss(heralded_density({0.398, 1.0, 0.77, 12}), 0.72);
  const QuadratureSampler sampler(rho);
  std::vector<QuadratureSample> samples(count);
  for (std::size_t j = 0; j < count; ++j) {
    CounterRng rng(CounterRng::derive_key(5, CounterRng::kTest, j));
    samples[j].theta =
        std::fmod(0.1 + 2.0 * std::numbers::pi * 0.618 * static_cast<double>(j),
                  2.0 * std::numbers::pi);
    samples[j].x = sampler.sample(samples[j].theta, rng);
    samples[j].trace_id = j;
  }
  return samples;
}
}  // namespace

static void BM_MaxlikIteration(benchmark::State& state) {
  const auto samples = kitten_samples(static_cast<std::size_t>(state.range(0)));
  DensityMatrix rho = DensityMatrix::maximally_mixed(12);
  for (auto _ : state) {
    rho = maxlik_iterate(rho, samples, 0.72);
    benchmark::DoNotOptimize(rho.m.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MaxlikIteration)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_QuadratureSampling(benchmark::State& state) {
  const DensityMatrix rho = apply_loss(heralded_density({0.398, 1.0, 0.77, 12}), 0.72);
  const QuadratureSampler sampler(rho);
  CounterRng rng(CounterRng::derive_key(6, CounterRng::kTest, 0));
  double theta = 0.0;
  for (auto _ : state) {
    theta += 0.01;
    benchmark::DoNotOptimize(sampler.sample(theta, rng));
  }
}
BENCHMARK(BM_QuadratureSampling);

static void BM_WignerGrid(benchmark::State& state) {
  const DensityMatrix rho = apply_loss(heralded_density({0.398, 1.0, 0.77, 12}), 0.72);
  std::vector<double> axis(201);
  for (int i = 0; i < 201; ++i) axis[static_cast<std::size_t>(i)] = -5.0 + 0.05 * i;
  for (auto _ : state) {
    WignerGrid grid = wigner(rho, axis, axis);
    benchmark::DoNotOptimize(grid.values.data());
  }
  state.SetLabel("201x201, D=12");
}
BENCHMARK(BM_WignerGrid)->Unit(benchmark::kMillisecond);
