// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "cvhd/config.hpp"
#include "cvhd/rng.hpp"
#include "cvhd/signal_model.hpp"
#include "cvhd/tomography.hpp"
#include "cvhd/trace.hpp"

namespace cvhd {

/// rho = L_eta_prep[ S(r) (xi|1><1| + (1-xi)|0><0|) S(r)^dag ], truncated to
/// the model's Fock cutoff. Throws when the tail population rho_{D-1,D-1}
/// exceeds 1e-3 (advice: raise the cutoff).
DensityMatrix heralded_density(const HeraldedStateModel& model);

/// p(x|theta) = sum_mn rho_mn e^{i(n-m)theta} psi_m(x) psi_n(x) on the grid.
std::vector<double> marginal_pdf(const DensityMatrix& rho, double theta,
                                 const std::vector<double>& x_grid);

/// Squeezed-vacuum background variance (e^{-2r} cos^2 + e^{2r} sin^2)/2.
double squeezed_variance(double r, double theta);

/// Inverse-CDF quadrature sampler on a dense grid (4096 points over +/-6
/// standard deviations of the widest quadrature, linear interpolation).
class QuadratureSampler {
 public:
  explicit QuadratureSampler(const DensityMatrix& rho, std::size_t grid_points = 4096,
                             double n_sigmas = 6.0);

  double sample(double theta, CounterRng& rng) const;  // one draw, fresh CDF
  void sample_many(double theta, std::size_t count, CounterRng& rng,
                   std::vector<double>& out) const;    // shared CDF
  std::vector<double> pdf_grid(double theta) const;    // clamped to >= 0
  const std::vector<double>& x_grid() const { return x_grid_; }

 private:
  void build_cdf(const std::vector<double>& pdf, std::vector<double>& cdf) const;
  double invert(const std::vector<double>& cdf, double u) const;

  Eigen::MatrixXd psi_;        // grid x fock
  Eigen::MatrixXd re_rho_;
  Eigen::MatrixXd im_rho_;
  std::vector<double> x_grid_;
  int dim_;
};

/// Convenience single draw (builds the CDF internally; use QuadratureSampler
/// for bulk draws).
double sample_quadrature(const DensityMatrix& rho, double theta, CounterRng& rng);

struct TruthRecord {
  std::uint64_t trace_id = 0;
  double theta = 0.0;
  double x_true = 0.0;
};

/// Generates traces v(t) = X u_id(t) + b(t) + e(t) band-limited at the native
/// chain bandwidth. X is drawn from the detected state (preparation plus
/// detection loss), b is the squeezed background with its u_id component
/// replaced by the state quadrature, e is white electronic noise at snr_db
/// below vacuum. Every trace is a pure function of (config, trace_id).
class TraceSynthesizer {
 public:
  explicit TraceSynthesizer(const AcquisitionConfig& cfg);

  const AcquisitionConfig& config() const { return cfg_; }
  const TemporalMode& ideal_mode_on_span() const { return u_id_; }
  const DensityMatrix& prepared_state() const { return rho_prep_; }
  const DensityMatrix& detected_state() const { return rho_det_; }

  double theta_of(std::uint64_t trace_id) const;
  HomodyneTrace synth_trace(double theta, CounterRng& rng, std::uint64_t trace_id) const;
  HomodyneTrace trace(std::uint64_t trace_id) const;
  TruthRecord truth(std::uint64_t trace_id) const;

  /// Mean |H|^2 of the native chain over the synthesis DFT grid: the exact
  /// per-sample variance reduction the band limit applies to white noise.
  double band_power_fraction() const { return band_power_fraction_; }

 private:
  AcquisitionConfig cfg_;
  TemporalMode u_id_;
  DensityMatrix rho_prep_;
  DensityMatrix rho_det_;
  QuadratureSampler sampler_;
  double v_electronic_;
  double t_window_center_;
  double band_power_fraction_;
};

/// Streams the full dataset in trace_id order.
void synth_dataset(const AcquisitionConfig& cfg,
                   const std::function<void(HomodyneTrace&&, const TruthRecord&)>& sink);

}  // namespace cvhd
