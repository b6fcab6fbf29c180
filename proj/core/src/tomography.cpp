// SPDX-License-Identifier: Apache-2.0
#include "cvhd/tomography.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <string>

#include "cvhd/errors.hpp"

namespace cvhd {

namespace {
constexpr double kPi = std::numbers::pi;

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

void check_eta(double eta, const char* who) {
  if (!(eta > 0.0) || eta > 1.0)
    throw ConfigError(std::string(who) + ": efficiency must be in (0, 1]");
}
}  // namespace

DensityMatrix DensityMatrix::vacuum(int d) { return fock(0, d); }

DensityMatrix DensityMatrix::fock(int n, int d) {
  if (n < 0 || n >= d) throw ConfigError("DensityMatrix::fock: n out of range");
  DensityMatrix rho;
  rho.m = Eigen::MatrixXcd::Zero(d, d);
  rho.m(n, n) = 1.0;
  return rho;
}

DensityMatrix DensityMatrix::maximally_mixed(int d) {
  DensityMatrix rho;
  rho.m = Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d);
  return rho;
}

void DensityMatrix::validate(double herm_tol, double trace_tol, double psd_tol) const {
  const int d = dim();
  if (d == 0) throw NumericalError("density matrix: empty");
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm > herm_tol)
    throw NumericalError("density matrix: not Hermitian (deviation " + std::to_string(herm) + ")");
  const double tr = trace_real();
  if (std::abs(tr - 1.0) > trace_tol)
    throw NumericalError("density matrix: trace " + std::to_string(tr));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -psd_tol)
    throw NumericalError("density matrix: negative eigenvalue " + std::to_string(min_eig));
}

double fock_wavefunction(int n, double x) {
  if (n < 0) throw ConfigError("fock_wavefunction: n must be non-negative");
  double prev = 0.0;
  double cur = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  for (int k = 1; k <= n; ++k) {
    const double next = std::sqrt(2.0 / k) * x * cur - std::sqrt((k - 1.0) / k) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void fock_wavefunctions(int d, double x, double* out) {
  out[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (d > 1) out[1] = std::sqrt(2.0) * x * out[0];
  for (int k = 2; k < d; ++k)
    out[k] = std::sqrt(2.0 / k) * x * out[k - 1] - std::sqrt((k - 1.0) / k) * out[k - 2];
}

Eigen::MatrixXd povm_core(double x, int d, double eta) {
  check_eta(eta, "povm_core");
  std::vector<double> psi(static_cast<std::size_t>(d));
  fock_wavefunctions(d, x, psi.data());
  Eigen::MatrixXd core = Eigen::MatrixXd::Zero(d, d);
  if (eta == 1.0) {
    for (int m = 0; m < d; ++m)
      for (int n = m; n < d; ++n) core(m, n) = psi[m] * psi[n];
  } else {
    // b_{m,k} = sqrt(C(m,k) (1-eta)^k eta^(m-k))
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
    for (int m = 0; m < d; ++m)
      for (int k = 0; k <= m; ++k)
        b(m, k) = std::sqrt(binom(m, k) * std::pow(1.0 - eta, k) * std::pow(eta, m - k));
    for (int m = 0; m < d; ++m)
      for (int n = m; n < d; ++n) {
        double s = 0.0;
        for (int k = 0; k <= m; ++k) s += b(m, k) * b(n, k) * psi[m - k] * psi[n - k];
        core(m, n) = s;
      }
  }
  core.triangularView<Eigen::StrictlyLower>() = core.transpose();
  return core;
}

Eigen::MatrixXcd loss_povm(double x, double theta, int d, double eta) {
  const Eigen::MatrixXd core = povm_core(x, d, eta);
  Eigen::VectorXcd u(d);
  for (int n = 0; n < d; ++n)
    u(n) = std::polar(1.0, static_cast<double>(n) * theta);
  Eigen::MatrixXcd out(d, d);
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n) out(m, n) = core(m, n) * u(m) * std::conj(u(n));
  return out;
}

namespace {

/// Per-sample projectors cached once; iterations are O(d^2) per sample.
class MaxlikWorkspace {
 public:
  MaxlikWorkspace(const std::vector<QuadratureSample>& samples, int d, double eta,
                  int theta_bins)
      : d_(d), n_(samples.size()) {
    if (n_ == 0) throw ConfigError("maxlik: no samples");
    check_eta(eta, "maxlik");
    projectors_.resize(n_ * static_cast<std::size_t>(d) * d);
    ids_.resize(n_);
    const double bin_width = theta_bins > 0 ? kPi / theta_bins : 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      double theta = samples[j].theta;
      if (theta_bins > 0)
        theta = (std::floor(theta / bin_width) + 0.5) * bin_width;
      Eigen::Map<Eigen::MatrixXcd> proj(&projectors_[j * d_ * d_], d_, d_);
      proj = loss_povm(samples[j].x, theta, d_, eta);
      ids_[j] = samples[j].trace_id;
    }
  }

  /// One R rho R step in place; returns the log-likelihood of the input rho.
  double iterate(Eigen::MatrixXcd& rho) const {
    const Eigen::MatrixXcd rho_t = rho.transpose();
    Eigen::MatrixXcd r_op = Eigen::MatrixXcd::Zero(d_, d_);
    double loglik = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      Eigen::Map<const Eigen::MatrixXcd> proj(&projectors_[j * d_ * d_], d_, d_);
      const double p = proj.cwiseProduct(rho_t).sum().real();
      if (!(p > 1e-300))
        throw NumericalError("maxlik: vanishing probability for sample trace_id=" +
                             std::to_string(ids_[j]));
      loglik += std::log(p);
      r_op.noalias() += proj * (1.0 / p);
    }
    Eigen::MatrixXcd next = r_op * rho * r_op;
    next = 0.5 * (next + next.adjoint()).eval();
    const double tr = next.trace().real();
    if (!(tr > 0.0)) throw NumericalError("maxlik: non-positive trace after update");
    rho = next / tr;
    return loglik;
  }

 private:
  int d_;
  std::size_t n_;
  std::vector<std::complex<double>> projectors_;
  std::vector<std::uint64_t> ids_;
};

}  // namespace

DensityMatrix maxlik_iterate(const DensityMatrix& rho,
                             const std::vector<QuadratureSample>& samples, double eta) {
  MaxlikWorkspace ws(samples, rho.dim(), eta, 0);
  DensityMatrix out = rho;
  ws.iterate(out.m);
  return out;
}

MaxlikResult run_maxlik(const std::vector<QuadratureSample>& samples, int d, int iters,
                        double eta, const MaxlikOptions& opts) {
  if (iters < 1) throw ConfigError("run_maxlik: iters must be >= 1");
  if (d < 2) throw ConfigError("run_maxlik: dimension must be >= 2");
  MaxlikWorkspace ws(samples, d, eta, opts.theta_bins);
  MaxlikResult result;
  result.rho = DensityMatrix::maximally_mixed(d);
  result.loglik.reserve(static_cast<std::size_t>(iters));
  for (int k = 1; k <= iters; ++k) {
    const double ll = ws.iterate(result.rho.m);
    if (!result.loglik.empty() && result.converged_at == 0) {
      const double prev = result.loglik.back();
      if (std::abs(ll - prev) <= opts.convergence_rtol * std::abs(ll))
        result.converged_at = k;
    }
    result.loglik.push_back(ll);
  }
  return result;
}

WignerGrid wigner(const DensityMatrix& rho, const std::vector<double>& x_axis,
                  const std::vector<double>& p_axis) {
  const int d = rho.dim();
  if (d == 0) throw ConfigError("wigner: empty state");
  WignerGrid grid;
  grid.x_axis = x_axis;
  grid.p_axis = p_axis;
  grid.values.resize(static_cast<Eigen::Index>(x_axis.size()),
                     static_cast<Eigen::Index>(p_axis.size()));
  std::vector<std::complex<double>> wl(static_cast<std::size_t>(d));
  for (std::size_t ix = 0; ix < x_axis.size(); ++ix) {
    for (std::size_t ip = 0; ip < p_axis.size(); ++ip) {
      // Laguerre-Gaussian ladder over |m><n| kernels at one phase-space point.
      const std::complex<double> a(x_axis[ix] / std::sqrt(2.0), p_axis[ip] / std::sqrt(2.0));
      const std::complex<double> ac = std::conj(a);
      wl[0] = std::exp(-2.0 * std::norm(a)) / kPi;
      double w = rho.m(0, 0).real() * wl[0].real();
      for (int n = 1; n < d; ++n) {
        wl[n] = 2.0 * a * wl[n - 1] / std::sqrt(static_cast<double>(n));
        w += 2.0 * (rho.m(0, n) * wl[n]).real();
      }
      for (int m = 1; m < d; ++m) {
        std::complex<double> temp = wl[m];
        wl[m] = (2.0 * ac * temp - std::sqrt(static_cast<double>(m)) * wl[m - 1]) /
                std::sqrt(static_cast<double>(m));
        w += (rho.m(m, m) * wl[m]).real();
        for (int n = m + 1; n < d; ++n) {
          // W(|m><n|) = (2A W(|m><n-1|) - sqrt(m) W(|m-1><n-1|)) / sqrt(n)
          const std::complex<double> next =
              (2.0 * a * wl[n - 1] - std::sqrt(static_cast<double>(m)) * temp) /
              std::sqrt(static_cast<double>(n));
          temp = wl[n];
          wl[n] = next;
          w += 2.0 * (rho.m(m, n) * wl[n]).real();
        }
      }
      grid.values(static_cast<Eigen::Index>(ix), static_cast<Eigen::Index>(ip)) = w;
    }
  }
  return grid;
}

double WignerGrid::integral() const {
  if (x_axis.size() < 2 || p_axis.size() < 2) return 0.0;
  const double dx = x_axis[1] - x_axis[0];
  const double dp = p_axis[1] - p_axis[0];
  return values.sum() * dx * dp;
}

double wigner_origin(const DensityMatrix& rho) {
  double s = 0.0;
  for (int n = 0; n < rho.dim(); ++n) s += (n % 2 == 0 ? 1.0 : -1.0) * rho.m(n, n).real();
  return s / kPi;
}

namespace {
Eigen::MatrixXcd psd_sqrt(const DensityMatrix& rho, const char* who) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.m);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -1e-8)
    throw NumericalError(std::string(who) + ": input is not positive semidefinite (min eig " +
                         std::to_string(min_eig) + ")");
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}
}  // namespace

double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.dim() != rho2.dim()) throw ConfigError("fidelity: dimension mismatch");
  const Eigen::MatrixXcd s1 = psd_sqrt(rho1, "fidelity");
  Eigen::MatrixXcd inner = s1 * rho2.m * s1;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(inner, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw NumericalError("fidelity: second argument is not positive semidefinite");
  const double root_sum = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return root_sum * root_sum;
}

double wigner_overlap(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.dim() != rho2.dim()) throw ConfigError("wigner_overlap: dimension mismatch");
  const double cross = (rho1.m * rho2.m).trace().real();
  const double p1 = (rho1.m * rho1.m).trace().real();
  const double p2 = (rho2.m * rho2.m).trace().real();
  return cross / std::sqrt(p1 * p2);
}

Eigen::MatrixXd squeeze_operator(double r, int d) {
  if (d < 2) throw ConfigError("squeeze_operator: dimension must be >= 2");
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(d, d);
  for (int n = 2; n < d; ++n) {
    const double c = std::sqrt(static_cast<double>(n) * (n - 1.0));
    gen(n - 2, n) += 0.5 * r * c;   // (r/2) a^2
    gen(n, n - 2) -= 0.5 * r * c;   // -(r/2) a^dag^2
  }
  return gen.exp();
}

DensityMatrix apply_loss(const DensityMatrix& rho, double eta) {
  check_eta(eta, "apply_loss");
  const int d = rho.dim();
  if (eta == 1.0) return rho;
  DensityMatrix out;
  out.m = Eigen::MatrixXcd::Zero(d, d);
  const double lost = 1.0 - eta;
  for (int m = 0; m < d; ++m) {
    for (int n = m; n < d; ++n) {
      std::complex<double> s = 0.0;
      for (int k = 0; m + k < d && n + k < d; ++k) {
        const double w = std::sqrt(binom(m + k, k) * binom(n + k, k)) *
                         std::pow(eta, 0.5 * (m + n)) * std::pow(lost, k);
        s += w * rho.m(m + k, n + k);
      }
      out.m(m, n) = s;
      if (n != m) out.m(n, m) = std::conj(s);
    }
  }
  return out;
}

}  // namespace cvhd
