// SPDX-License-Identifier: Apache-2.0
#include "cvhd/quadrature_proj.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "cvhd/errors.hpp"
#include "cvhd/io.hpp"
#include "cvhd/trace_synth.hpp"

namespace cvhd {

namespace {
constexpr double kPi = std::numbers::pi;
}

double project_quadrature(const HomodyneTrace& trace, const TemporalMode& mode) {
  if (trace.size() != mode.size() ||
      std::abs(trace.dt - mode.dt) > 1e-12 * mode.dt ||
      std::abs(trace.t_start - mode.t_start) > 0.5 * mode.dt)
    throw ConfigError("project_quadrature: trace and mode grids differ");
  double s = 0.0;
  for (std::size_t k = 0; k < mode.size(); ++k) s += mode.samples[k] * trace.samples[k];
  return s * trace.dt;
}

double estimate_phase(const HomodyneTrace& trace, double window_lo, double window_hi,
                      const PhaseEstimationModel& model) {
  if (!(model.squeezing_r > 0.0))
    throw NumericalError("estimate_phase: phase unidentifiable (r = 0 gives a flat variance)");
  const double r = model.squeezing_r;
  const double q = model.band_power_fraction;
  if (!(q > 0.0)) throw ConfigError("estimate_phase: invalid band power fraction");

  // Side-region samples are zero-mean Gaussians whose variance tracks the LO
  // scan: Var[v_k] = Q (V_sq(theta + w (t_k - t_c)) + v_e) / dt.
  const double t_center = 0.5 * (window_lo + window_hi);
  std::vector<double> vv, dtheta;
  double mean_square = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double t = trace.time_at(k);
    if (t >= window_lo && t < window_hi) continue;
    const double v = trace.samples[k];
    vv.push_back(v * v);
    dtheta.push_back(model.scan.rate_rad_per_s * (t - t_center));
    mean_square += v * v;
  }
  if (vv.size() < model.min_side_samples)
    throw ConfigError("estimate_phase: side regions contain fewer than " +
                      std::to_string(model.min_side_samples) + " samples");

  // Sanity check against the squeezed-vacuum variance range.
  const double v_center = mean_square / static_cast<double>(vv.size()) * trace.dt / q -
                          model.electronic_variance;
  const double v_min = 0.5 * std::exp(-2.0 * r);
  const double v_max = 0.5 * std::exp(2.0 * r);
  if (v_center < v_min * (1.0 - model.variance_tolerance) ||
      v_center > v_max * (1.0 + model.variance_tolerance))
    throw NumericalError("estimate_phase: side variance " + std::to_string(v_center) +
                         " outside the squeezed-vacuum range");

  // Gaussian likelihood scan over the window-center phase. The intra-trace
  // drift makes theta and pi - theta distinguishable (the known scan
  // direction resolves the inversion ambiguity); pi-periodicity is physical.
  const double scale = q / trace.dt;
  const auto neg_loglik = [&](double theta) {
    double nll = 0.0;
    for (std::size_t k = 0; k < vv.size(); ++k) {
      const double var =
          scale * (squeezed_variance(r, theta + dtheta[k]) + model.electronic_variance);
      nll += std::log(var) + vv[k] / var;
    }
    return nll;
  };
  constexpr int kGrid = 180;
  double best_theta = 0.0;
  double best_nll = std::numeric_limits<double>::infinity();
  int best_i = 0;
  std::array<double, kGrid> nll_at{};
  for (int i = 0; i < kGrid; ++i) {
    const double theta = kPi * i / kGrid;
    nll_at[static_cast<std::size_t>(i)] = neg_loglik(theta);
    if (nll_at[static_cast<std::size_t>(i)] < best_nll) {
      best_nll = nll_at[static_cast<std::size_t>(i)];
      best_theta = theta;
      best_i = i;
    }
  }
  // Parabolic refinement on the periodic grid.
  const double step = kPi / kGrid;
  const double f_minus = nll_at[static_cast<std::size_t>((best_i + kGrid - 1) % kGrid)];
  const double f_plus = nll_at[static_cast<std::size_t>((best_i + 1) % kGrid)];
  const double denom = f_minus - 2.0 * best_nll + f_plus;
  if (denom > 0.0) {
    const double shift = 0.5 * (f_minus - f_plus) / denom;
    best_theta += std::clamp(shift, -1.0, 1.0) * step;
  }
  best_theta = std::fmod(best_theta + kPi, kPi);
  return best_theta;
}

TomoSet collect_tomo_set(const std::vector<HomodyneTrace>& windowed_traces,
                         const TemporalMode& mode, const std::vector<double>& thetas,
                         double eta_hd) {
  if (windowed_traces.size() != thetas.size())
    throw ConfigError("collect_tomo_set: one theta per trace required");
  if (mode_norm_sq(mode) <= 0.0) throw ConfigError("collect_tomo_set: empty mode");
  if (!(eta_hd > 0.0 && eta_hd <= 1.0))
    throw ConfigError("collect_tomo_set: eta_hd must be in (0, 1]");
  TomoSet set;
  set.eta_hd = eta_hd;
  set.fs_sps = mode.dt > 0.0 ? 1.0 / mode.dt : 0.0;
  set.mode_hash = io::mode_hash(mode);
  set.samples.reserve(windowed_traces.size());
  for (std::size_t i = 0; i < windowed_traces.size(); ++i) {
    QuadratureSample s;
    s.x = project_quadrature(windowed_traces[i], mode);
    s.theta = thetas[i];
    s.trace_id = windowed_traces[i].trace_id;
    set.samples.push_back(s);
  }
  return set;
}

}  // namespace cvhd
