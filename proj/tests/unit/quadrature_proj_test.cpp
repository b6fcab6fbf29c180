// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cvhd/errors.hpp"
#include "cvhd/quadrature_proj.hpp"
#include "cvhd/trace_synth.hpp"

using namespace cvhd;

namespace {
constexpr double kPi = std::numbers::pi;

AcquisitionConfig small_config() {
  AcquisitionConfig cfg;
  cfg.f_s_sps = 1e9;
  cfg.side_region_s = 0.3e-6;
  cfg.n_traces = 400;
  return cfg;
}

PhaseEstimationModel estimation_model(const AcquisitionConfig& cfg,
                                      const TraceSynthesizer& synth) {
  PhaseEstimationModel m;
  m.scan = cfg.scan;
  m.squeezing_r = cfg.state.r;
  m.band_power_fraction = synth.band_power_fraction();
  m.electronic_variance = cfg.electronic_variance();
  return m;
}

double dist_mod_pi(double a, double b) {
  double d = std::fmod(std::abs(a - b), kPi);
  return std::min(d, kPi - d);
}
}  // namespace

TEST_CASE("projecting the mode onto itself gives one") {
  TemporalMode u;
  u.dt = 1e-9;
  u.t_start = 0.0;
  u.samples.resize(256);
  for (std::size_t k = 0; k < 256; ++k)
    u.samples[k] = std::exp(-std::pow((static_cast<double>(k) - 128.0) / 40.0, 2));
  normalize_mode(u);
  HomodyneTrace t;
  t.samples = u.samples;
  t.dt = u.dt;
  t.t_start = u.t_start;
  CHECK(project_quadrature(t, u) == doctest::Approx(1.0).epsilon(1e-9));
  t.dt = 2e-9;
  CHECK_THROWS_AS(project_quadrature(t, u), ConfigError);
}

TEST_CASE("projection is linear in the trace") {
  TemporalMode u;
  u.dt = 1e-9;
  u.t_start = 0.0;
  u.samples.assign(64, 0.0);
  CounterRng rng(CounterRng::derive_key(21, CounterRng::kTest, 0));
  for (auto& s : u.samples) s = rng.gaussian();
  normalize_mode(u);
  HomodyneTrace a, b;
  a.dt = b.dt = u.dt;
  a.t_start = b.t_start = 0.0;
  a.samples.resize(64);
  b.samples.resize(64);
  for (std::size_t k = 0; k < 64; ++k) {
    a.samples[k] = rng.gaussian();
    b.samples[k] = rng.gaussian();
  }
  HomodyneTrace combo = a;
  for (std::size_t k = 0; k < 64; ++k) combo.samples[k] = 2.5 * a.samples[k] - 0.7 * b.samples[k];
  CHECK(project_quadrature(combo, u) ==
        doctest::Approx(2.5 * project_quadrature(a, u) - 0.7 * project_quadrature(b, u))
            .epsilon(1e-9));
}

TEST_CASE("phase estimation requires squeezing") {
  AcquisitionConfig cfg = small_config();
  TraceSynthesizer synth(cfg);
  PhaseEstimationModel model = estimation_model(cfg, synth);
  model.squeezing_r = 0.0;
  CHECK_THROWS_AS(
      estimate_phase(synth.trace(0), cfg.window_lo_s, cfg.window_hi_s, model),
      NumericalError);
}

TEST_CASE("phase estimation median error is below 0.1 rad") {
  AcquisitionConfig cfg = small_config();
  cfg.state.r = 0.5;
  cfg.state.xi = 1.0;
  cfg.state.eta_prep = 0.77;
  cfg.snr_db = 600.0;  // no electronic noise
  cfg.n_traces = 600;
  TraceSynthesizer synth(cfg);
  PhaseEstimationModel model = estimation_model(cfg, synth);
  std::vector<double> errors;
  for (std::uint64_t i = 0; i < cfg.n_traces; ++i) {
    const double est =
        estimate_phase(synth.trace(i), cfg.window_lo_s, cfg.window_hi_s, model);
    CHECK(est >= 0.0);
    CHECK(est < kPi);
    errors.push_back(dist_mod_pi(est, synth.theta_of(i)));
  }
  std::sort(errors.begin(), errors.end());
  CHECK(errors[errors.size() / 2] < 0.1);
}

TEST_CASE("phase estimation near the squeezing stationary point") {
  AcquisitionConfig cfg = small_config();
  cfg.state.r = 0.5;
  cfg.state.xi = 1.0;
  cfg.snr_db = 600.0;
  TraceSynthesizer synth(cfg);
  PhaseEstimationModel model = estimation_model(cfg, synth);
  int ok = 0;
  const int trials = 60;
  for (int i = 0; i < trials; ++i) {
    CounterRng rng(CounterRng::derive_key(cfg.seed, CounterRng::kTest,
                                          static_cast<std::uint64_t>(i)));
    HomodyneTrace t = synth.synth_trace(0.0, rng, static_cast<std::uint64_t>(i));
    const double est = estimate_phase(t, cfg.window_lo_s, cfg.window_hi_s, model);
    const double d = std::min(std::abs(est), std::abs(kPi - est));
    if (d < 0.15) ++ok;
  }
  CHECK(ok >= trials * 3 / 4);
}

TEST_CASE("phase estimation rejects out-of-range variance") {
  AcquisitionConfig cfg = small_config();
  TraceSynthesizer synth(cfg);
  PhaseEstimationModel model = estimation_model(cfg, synth);
  HomodyneTrace t = synth.trace(0);
  for (auto& v : t.samples) v *= 40.0;
  CHECK_THROWS_AS(estimate_phase(t, cfg.window_lo_s, cfg.window_hi_s, model),
                  NumericalError);
  HomodyneTrace flat = synth.trace(0);
  for (auto& v : flat.samples) v = 0.0;
  CHECK_THROWS_AS(estimate_phase(flat, cfg.window_lo_s, cfg.window_hi_s, model),
                  NumericalError);
}

TEST_CASE("phase estimation needs enough side samples") {
  AcquisitionConfig cfg = small_config();
  TraceSynthesizer synth(cfg);
  PhaseEstimationModel model = estimation_model(cfg, synth);
  // A window covering almost the whole span leaves too few side samples.
  CHECK_THROWS_AS(estimate_phase(synth.trace(0), -1.549e-6, -0.701e-6, model), ConfigError);
}

TEST_CASE("collect_tomo_set carries metadata and validates inputs") {
  TemporalMode u;
  u.dt = 1e-9;
  u.t_start = 0.0;
  u.samples.assign(32, 1.0);
  normalize_mode(u);
  std::vector<HomodyneTrace> traces(5);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    traces[i].samples.assign(32, static_cast<double>(i));
    traces[i].dt = 1e-9;
    traces[i].t_start = 0.0;
    traces[i].trace_id = i;
  }
  std::vector<double> thetas = {0.0, 0.5, 1.0, 1.5, 2.0};
  TomoSet set = collect_tomo_set(traces, u, thetas, 0.72);
  CHECK(set.samples.size() == 5);
  CHECK(set.eta_hd == doctest::Approx(0.72));
  CHECK(set.mode_hash != 0);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(set.samples[i].theta == thetas[i]);
    CHECK(set.samples[i].trace_id == i);
  }

  TemporalMode zero = u;
  zero.samples.assign(32, 0.0);
  CHECK_THROWS_AS(collect_tomo_set(traces, zero, thetas, 0.72), ConfigError);
  thetas.pop_back();
  CHECK_THROWS_AS(collect_tomo_set(traces, u, thetas, 0.72), ConfigError);
}

TEST_CASE("kitten dataset is phase covering with anti-squeezed excess variance") {
  AcquisitionConfig cfg = small_config();
  cfg.n_traces = 2500;
  TraceSynthesizer synth(cfg);
  const TemporalMode& uid = synth.ideal_mode_on_span();
  std::vector<double> var(8, 0.0), mean(8, 0.0);
  std::vector<int> count(8, 0);
  for (std::uint64_t i = 0; i < cfg.n_traces; ++i) {
    const double theta = synth.theta_of(i);
    const double x = project_quadrature(synth.trace(i), uid);
    const auto bin = static_cast<std::size_t>(std::fmod(theta, kPi) / kPi * 8.0);
    mean[bin] += x;
    var[bin] += x * x;
    ++count[bin];
  }
  for (std::size_t b = 0; b < 8; ++b) {
    REQUIRE(count[b] > 100);  // phase covering
    mean[b] /= count[b];
    var[b] = var[b] / count[b] - mean[b] * mean[b];
  }
  // Bins around pi/2 (anti-squeezing) show variance above the vacuum level.
  CHECK(var[3] > 0.5);
  CHECK(var[4] > 0.5);
}
