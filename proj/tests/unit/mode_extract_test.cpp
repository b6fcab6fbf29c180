// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "cvhd/errors.hpp"
#include "cvhd/mode_extract.hpp"
#include "cvhd/rng.hpp"
#include "cvhd/signal_model.hpp"

using namespace cvhd;

namespace {
TemporalMode test_mode(std::size_t n, double dt) {
  TemporalMode u;
  u.dt = dt;
  u.t_start = 0.0;
  u.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    u.samples[k] = std::exp(-0.5 * std::pow((static_cast<double>(k) - 0.6 * n) / (0.15 * n), 2));
  normalize_mode(u);
  return u;
}

HomodyneTrace trace_from(const std::vector<double>& v, double dt, std::uint64_t id = 0) {
  HomodyneTrace t;
  t.samples = v;
  t.dt = dt;
  t.t_start = 0.0;
  t.trace_id = id;
  return t;
}
}  // namespace

TEST_CASE("single trace gives the rank-1 outer product") {
  std::vector<double> v = {1.0, -2.0, 3.0};
  AutocorrAccumulator acc;
  acc.add(trace_from(v, 1e-9));
  AutocorrMatrix k = acc.finalize();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(k.entries(i, j) == doctest::Approx(v[static_cast<std::size_t>(i)] *
                                               v[static_cast<std::size_t>(j)]));
}

TEST_CASE("accumulator rejects mismatched grids and merges partials") {
  AutocorrAccumulator acc;
  acc.add(trace_from({1.0, 2.0}, 1e-9));
  CHECK_THROWS_AS(acc.add(trace_from({1.0, 2.0, 3.0}, 1e-9)), ConfigError);

  AutocorrAccumulator left, right, whole;
  for (int i = 0; i < 10; ++i) {
    CounterRng rng(CounterRng::derive_key(5, CounterRng::kTest, static_cast<std::uint64_t>(i)));
    std::vector<double> v(16);
    for (auto& x : v) x = rng.gaussian();
    (i % 2 == 0 ? left : right).add(trace_from(v, 1e-9));
    whole.add(trace_from(v, 1e-9));
  }
  left.merge(right);
  AutocorrMatrix merged = left.finalize();
  AutocorrMatrix direct = whole.finalize();
  CHECK((merged.entries - direct.entries).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("white noise autocorrelation is nearly diagonal") {
  const std::size_t m = 64;
  AutocorrAccumulator acc;
  for (int i = 0; i < 10000; ++i) {
    CounterRng rng(CounterRng::derive_key(7, CounterRng::kTest, static_cast<std::uint64_t>(i)));
    std::vector<double> v(m);
    for (auto& x : v) x = rng.gaussian();
    acc.add(trace_from(v, 1e-9));
  }
  AutocorrMatrix k = acc.finalize();
  double diag = 0.0, off = 0.0;
  std::size_t off_count = 0;
  for (std::size_t i = 0; i < m; ++i) {
    diag += k.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) {
        off += std::pow(k.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 2);
        ++off_count;
      }
  }
  diag /= static_cast<double>(m);
  CHECK(std::sqrt(off / static_cast<double>(off_count)) / diag < 0.05);
}

TEST_CASE("rank-one ensembles reproduce the known eigenpair") {
  const std::size_t m = 96;
  TemporalMode u = test_mode(m, 1e-9);
  const double sigma = 1.3;
  AutocorrAccumulator acc;
  double sum_x2 = 0.0;
  for (int i = 0; i < 20000; ++i) {
    CounterRng rng(CounterRng::derive_key(9, CounterRng::kTest, static_cast<std::uint64_t>(i)));
    const double x = sigma * rng.gaussian();
    sum_x2 += x * x;
    std::vector<double> v(m);
    for (std::size_t k = 0; k < m; ++k) v[k] = x * u.samples[k];
    acc.add(trace_from(v, 1e-9));
  }
  AutocorrMatrix k = acc.finalize();
  DominantModeResult dom = dominant_mode(k);
  double u2 = 0.0;
  for (double s : u.samples) u2 += s * s;
  const double expected = (sum_x2 / 20000.0) * u2;
  CHECK(dom.eigenvalue == doctest::Approx(expected).epsilon(0.03));
  CHECK(mode_overlap(dom.mode, u) >= 1.0 - 1e-9);
  CHECK(mode_norm_sq(dom.mode) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("dominant mode flags a degenerate spectrum") {
  AutocorrMatrix k;
  k.entries = Eigen::MatrixXd::Identity(8, 8);
  k.dt = 1e-9;
  k.t_start = 0.0;
  DominantModeResult dom = dominant_mode(k);
  CHECK(dom.degenerate_warning);
}

TEST_CASE("dominant mode rejects asymmetric input") {
  AutocorrMatrix k;
  k.entries = Eigen::MatrixXd::Zero(4, 4);
  k.entries(0, 1) = 1.0;
  k.dt = 1e-9;
  CHECK_THROWS_AS(dominant_mode(k), NumericalError);
}

TEST_CASE("mode mismatch basics") {
  TemporalMode u = test_mode(128, 1e-9);
  CHECK(mode_mismatch(u, u) == doctest::Approx(0.0).epsilon(1e-12));

  TemporalMode v = u;
  for (std::size_t k = 0; k < v.size(); ++k)
    v.samples[k] = std::sin(2.0 * 3.14159265358979 * 8.0 * k / 128.0);
  double proj = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) proj += v.samples[k] * u.samples[k];
  proj *= v.dt;
  for (std::size_t k = 0; k < v.size(); ++k) v.samples[k] -= proj * u.samples[k];
  normalize_mode(v);
  CHECK(mode_mismatch(u, v) == doctest::Approx(1.0).epsilon(1e-9));

  // Symmetric and invariant under a global sign flip.
  CHECK(mode_mismatch(u, v) == doctest::Approx(mode_mismatch(v, u)).epsilon(1e-12));
  TemporalMode w = v;
  for (auto& s : w.samples) s = -s;
  CHECK(mode_mismatch(u, w) == doctest::Approx(mode_mismatch(u, v)).epsilon(1e-12));
}

TEST_CASE("mode mismatch across sampling rates") {
  TemporalMode fine = test_mode(1024, 1e-9);
  TemporalMode coarse = interpolate_to_grid(fine, fine.t_start, 8e-9, 128);
  CHECK(mode_mismatch(coarse, fine) < 5e-3);
  TemporalMode disjoint = test_mode(64, 1e-9);
  disjoint.t_start = 1.0;
  CHECK_THROWS_AS(mode_mismatch(disjoint, fine), ConfigError);
}
