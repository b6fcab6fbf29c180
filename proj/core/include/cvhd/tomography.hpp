// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace cvhd {

/// One tomographic point: projected quadrature value and LO phase.
struct QuadratureSample {
  double x = 0.0;
  double theta = 0.0;  // radians in [0, 2pi)
  std::uint64_t trace_id = 0;
};

/// Truncated Fock-basis density matrix. Physical states are Hermitian,
/// unit-trace and positive semidefinite; validate() enforces it.
struct DensityMatrix {
  Eigen::MatrixXcd m;

  int dim() const { return static_cast<int>(m.rows()); }
  static DensityMatrix vacuum(int d);
  static DensityMatrix fock(int n, int d);
  static DensityMatrix maximally_mixed(int d);

  double trace_real() const { return m.trace().real(); }
  /// Throws NumericalError when Hermiticity/trace/PSD tolerances are violated.
  void validate(double herm_tol = 1e-10, double trace_tol = 1e-10,
                double psd_tol = 1e-10) const;
};

/// Harmonic-oscillator eigenfunction psi_n(x) (vacuum variance 1/2),
/// stable upward recurrence.
double fock_wavefunction(int n, double x);

/// psi_0..psi_{d-1} at x in one pass.
void fock_wavefunctions(int d, double x, double* out);

/// Quadrature projector damped by a loss channel of efficiency eta:
///   Pi(x, theta) = sum_k A_k^dag |x,theta><x,theta| A_k,
/// with <n|x,theta> = e^{i n theta} psi_n(x). For eta = 1 this is the rank-1
/// projector. Pi factorizes as Pi_mn = e^{i(m-n)theta} * M_mn(x) with M real
/// symmetric; povm_core returns M.
Eigen::MatrixXd povm_core(double x, int d, double eta);
Eigen::MatrixXcd loss_povm(double x, double theta, int d, double eta);

/// One R rho R / Tr[...] step over unbinned samples.
DensityMatrix maxlik_iterate(const DensityMatrix& rho,
                             const std::vector<QuadratureSample>& samples, double eta);

struct MaxlikOptions {
  int iters = 1000;
  double convergence_rtol = 1e-10;  // relative log-likelihood change
  int theta_bins = 0;               // 0 = unbinned
};

struct MaxlikResult {
  DensityMatrix rho;
  std::vector<double> loglik;  // one entry per iteration
  int converged_at = 0;        // first 1-based iteration under tolerance; 0 = never
};

MaxlikResult run_maxlik(const std::vector<QuadratureSample>& samples, int d, int iters,
                        double eta, const MaxlikOptions& opts = {});

/// Wigner function on a cartesian grid, convention integral W dx dp = 1,
/// vacuum W(0,0) = 1/pi.
struct WignerGrid {
  std::vector<double> x_axis;
  std::vector<double> p_axis;
  Eigen::MatrixXd values;  // values(i, j) = W(x_axis[i], p_axis[j])

  double integral() const;
  double min_value() const { return values.minCoeff(); }
};

WignerGrid wigner(const DensityMatrix& rho, const std::vector<double>& x_axis,
                  const std::vector<double>& p_axis);

/// (1/pi) sum_n (-1)^n rho_nn.
double wigner_origin(const DensityMatrix& rho);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2.
double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// Tr[rho1 rho2] / sqrt(Tr[rho1^2] Tr[rho2^2]); reported alongside the
/// Uhlmann fidelity in sweep outputs.
double wigner_overlap(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// Truncated squeeze operator exp((r/2)(a^2 - a^dag^2)) at dimension d,
/// built as a matrix exponential.
Eigen::MatrixXd squeeze_operator(double r, int d);

/// Fock-basis loss channel of efficiency eta (binomial damping).
DensityMatrix apply_loss(const DensityMatrix& rho, double eta);

}  // namespace cvhd
