// SPDX-License-Identifier: Apache-2.0
#include "cvhd/trace_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cvhd/dsp_chain.hpp"
#include "cvhd/errors.hpp"

namespace cvhd {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}
}  // namespace

DensityMatrix heralded_density(const HeraldedStateModel& model) {
  model.validate();
  const int d = model.fock_cutoff;
  const int work = std::max(2 * d, d + 16);
  Eigen::MatrixXd rho0 = Eigen::MatrixXd::Zero(work, work);
  rho0(0, 0) = 1.0 - model.xi;
  rho0(1, 1) = model.xi;
  const Eigen::MatrixXd s = squeeze_operator(model.r, work);
  DensityMatrix rho;
  rho.m = (s * rho0 * s.transpose()).cast<std::complex<double>>();
  // Renormalize the working-dimension truncation of the squeeze operator.
  rho.m /= rho.m.trace().real();
  rho = apply_loss(rho, model.eta_prep);
  const double tail = rho.m(d - 1, d - 1).real();
  if (tail >= 1e-3)
    throw NumericalError("heralded_density: tail population " + std::to_string(tail) +
                         " at n = " + std::to_string(d - 1) +
                         "; increase the Fock cutoff");
  DensityMatrix out;
  out.m = rho.m.topLeftCorner(d, d);
  out.m = 0.5 * (out.m + out.m.adjoint()).eval();
  out.m /= out.m.trace().real();
  return out;
}

std::vector<double> marginal_pdf(const DensityMatrix& rho, double theta,
                                 const std::vector<double>& x_grid) {
  const int d = rho.dim();
  std::vector<double> psi(static_cast<std::size_t>(d));
  std::vector<double> out(x_grid.size());
  Eigen::VectorXcd v(d);
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    fock_wavefunctions(d, x_grid[i], psi.data());
    for (int n = 0; n < d; ++n)
      v(n) = std::polar(psi[static_cast<std::size_t>(n)], static_cast<double>(n) * theta);
    out[i] = (v.adjoint() * rho.m * v)(0).real();
  }
  return out;
}

double squeezed_variance(double r, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return 0.5 * (std::exp(-2.0 * r) * c * c + std::exp(2.0 * r) * s * s);
}

QuadratureSampler::QuadratureSampler(const DensityMatrix& rho, std::size_t grid_points,
                                     double n_sigmas)
    : dim_(rho.dim()) {
  if (grid_points < 64) throw ConfigError("QuadratureSampler: grid too small");
  // Span +/- n_sigmas of the widest quadrature: Var(theta) <= (2 nbar + 1)/2 + |<a^2>|.
  double nbar = 0.0;
  for (int n = 0; n < dim_; ++n) nbar += n * rho.m(n, n).real();
  std::complex<double> a2 = 0.0;
  for (int n = 0; n + 2 < dim_; ++n)
    a2 += std::sqrt((n + 1.0) * (n + 2.0)) * rho.m(n, n + 2);
  const double v_max = 0.5 * (2.0 * nbar + 1.0) + std::abs(a2);
  const double x_max = n_sigmas * std::sqrt(v_max);

  x_grid_.resize(grid_points);
  const double dx = 2.0 * x_max / static_cast<double>(grid_points - 1);
  for (std::size_t i = 0; i < grid_points; ++i)
    x_grid_[i] = -x_max + dx * static_cast<double>(i);

  psi_.resize(static_cast<Eigen::Index>(grid_points), dim_);
  std::vector<double> col(static_cast<std::size_t>(dim_));
  for (std::size_t i = 0; i < grid_points; ++i) {
    fock_wavefunctions(dim_, x_grid_[i], col.data());
    for (int n = 0; n < dim_; ++n) psi_(static_cast<Eigen::Index>(i), n) = col[n];
  }
  re_rho_ = rho.m.real();
  im_rho_ = rho.m.imag();
}

std::vector<double> QuadratureSampler::pdf_grid(double theta) const {
  // p(x) = psi(x)^T Re[diag(u*) rho diag(u)] psi(x) with u_n = e^{i n theta}.
  Eigen::VectorXd cs(dim_), sn(dim_);
  for (int n = 0; n < dim_; ++n) {
    cs(n) = std::cos(n * theta);
    sn(n) = std::sin(n * theta);
  }
  Eigen::MatrixXd rotated(dim_, dim_);
  for (int m = 0; m < dim_; ++m)
    for (int n = 0; n < dim_; ++n) {
      const double c = cs(m) * cs(n) + sn(m) * sn(n);   // cos((n-m) theta)
      const double s = cs(m) * sn(n) - sn(m) * cs(n);   // sin((n-m) theta)
      rotated(m, n) = re_rho_(m, n) * c - im_rho_(m, n) * s;
    }
  Eigen::VectorXd p = ((psi_ * rotated).cwiseProduct(psi_)).rowwise().sum();
  std::vector<double> out(x_grid_.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::max(0.0, p(static_cast<Eigen::Index>(i)));
  return out;
}

void QuadratureSampler::build_cdf(const std::vector<double>& pdf,
                                  std::vector<double>& cdf) const {
  cdf.resize(pdf.size());
  cdf[0] = 0.0;
  const double dx = x_grid_[1] - x_grid_[0];
  for (std::size_t i = 1; i < pdf.size(); ++i)
    cdf[i] = cdf[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * dx;
  if (!(cdf.back() > 0.0)) throw NumericalError("QuadratureSampler: zero total probability");
}

double QuadratureSampler::invert(const std::vector<double>& cdf, double u) const {
  const double target = u * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.begin()) return x_grid_.front();
  if (it == cdf.end()) return x_grid_.back();
  const std::size_t hi = static_cast<std::size_t>(it - cdf.begin());
  const std::size_t lo = hi - 1;
  const double seg = cdf[hi] - cdf[lo];
  const double frac = seg > 0.0 ? (target - cdf[lo]) / seg : 0.0;
  return x_grid_[lo] + frac * (x_grid_[hi] - x_grid_[lo]);
}

double QuadratureSampler::sample(double theta, CounterRng& rng) const {
  const double u = rng.uniform();
  std::vector<double> cdf;
  build_cdf(pdf_grid(theta), cdf);
  return invert(cdf, u);
}

void QuadratureSampler::sample_many(double theta, std::size_t count, CounterRng& rng,
                                    std::vector<double>& out) const {
  std::vector<double> cdf;
  build_cdf(pdf_grid(theta), cdf);
  out.resize(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = invert(cdf, rng.uniform());
}

double sample_quadrature(const DensityMatrix& rho, double theta, CounterRng& rng) {
  return QuadratureSampler(rho).sample(theta, rng);
}

TraceSynthesizer::TraceSynthesizer(const AcquisitionConfig& cfg)
    : cfg_(cfg),
      rho_prep_(heralded_density(cfg.state)),
      rho_det_(apply_loss(heralded_density(cfg.state), cfg.eta_hd)),
      sampler_(rho_det_),
      v_electronic_(cfg.electronic_variance()),
      t_window_center_(0.5 * (cfg.window_lo_s + cfg.window_hi_s)) {
  cfg_.validate();
  const std::size_t n = cfg_.synth_samples();
  u_id_ = ideal_mode_on_grid(cfg_.gamma_hz, cfg_.t0_s, cfg_.synth_t_start(), cfg_.dt(), n);
  const ButterworthSpec chain{cfg_.f_c_hz, 1.0};
  double q = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = static_cast<double>(std::min(k, n - k)) / (static_cast<double>(n) * cfg_.dt());
    const double g = butterworth_gain(f, chain);
    q += g * g;
  }
  band_power_fraction_ = q / static_cast<double>(n);
}

double TraceSynthesizer::theta_of(std::uint64_t trace_id) const {
  const double t = static_cast<double>(trace_id) * cfg_.scan.trigger_period_s;
  return wrap_2pi(cfg_.scan.offset_rad + cfg_.scan.rate_rad_per_s * t);
}

HomodyneTrace TraceSynthesizer::synth_trace(double theta, CounterRng& rng,
                                            std::uint64_t trace_id) const {
  const std::size_t n = u_id_.size();
  const double dt = cfg_.dt();
  const double x_state = sampler_.sample(theta, rng);

  HomodyneTrace trace;
  trace.dt = dt;
  trace.t_start = cfg_.synth_t_start();
  trace.true_phase = theta;
  trace.trace_id = trace_id;
  trace.samples.resize(n);

  // Squeezed background, variance tracking the LO scan within the trace.
  const double r = cfg_.state.r;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = trace.time_at(k);
    const double theta_k = theta + cfg_.scan.rate_rad_per_s * (t - t_window_center_);
    trace.samples[k] = std::sqrt(squeezed_variance(r, theta_k) / dt) * rng.gaussian();
  }
  // Replace the u_id component of the background with the state quadrature.
  double proj = 0.0;
  for (std::size_t k = 0; k < n; ++k) proj += u_id_.samples[k] * trace.samples[k];
  proj *= dt;
  for (std::size_t k = 0; k < n; ++k)
    trace.samples[k] += (x_state - proj) * u_id_.samples[k];
  // Electronic noise floor.
  const double sigma_e = std::sqrt(v_electronic_ / dt);
  for (std::size_t k = 0; k < n; ++k) trace.samples[k] += sigma_e * rng.gaussian();

  return dsp::apply_bandwidth(trace, ButterworthSpec{cfg_.f_c_hz, 1.0});
}

HomodyneTrace TraceSynthesizer::trace(std::uint64_t trace_id) const {
  CounterRng rng(CounterRng::derive_key(cfg_.seed, CounterRng::kTraceSynth, trace_id));
  return synth_trace(theta_of(trace_id), rng, trace_id);
}

TruthRecord TraceSynthesizer::truth(std::uint64_t trace_id) const {
  CounterRng rng(CounterRng::derive_key(cfg_.seed, CounterRng::kTraceSynth, trace_id));
  TruthRecord record;
  record.trace_id = trace_id;
  record.theta = theta_of(trace_id);
  record.x_true = sampler_.sample(record.theta, rng);  // first draw of the trace stream
  return record;
}

void synth_dataset(const AcquisitionConfig& cfg,
                   const std::function<void(HomodyneTrace&&, const TruthRecord&)>& sink) {
  TraceSynthesizer synth(cfg);
  for (std::uint64_t i = 0; i < cfg.n_traces; ++i) {
    TruthRecord truth = synth.truth(i);
    sink(synth.trace(i), truth);
  }
}

}  // namespace cvhd
