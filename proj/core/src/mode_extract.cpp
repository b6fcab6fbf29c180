// SPDX-License-Identifier: Apache-2.0
#include "cvhd/mode_extract.hpp"

#include <cmath>

#include "cvhd/errors.hpp"

namespace cvhd {

namespace {
constexpr std::size_t kBatch = 64;  // traces per rank update

void check_grid(const HomodyneTrace& t, double dt, double t_start, std::size_t length) {
  if (t.size() != length || std::abs(t.dt - dt) > 1e-12 * dt ||
      std::abs(t.t_start - t_start) > 0.5 * dt)
    throw ConfigError("autocorr: trace grid mismatch");
}
}  // namespace

void AutocorrAccumulator::add(const HomodyneTrace& trace) {
  if (trace.samples.empty()) throw ConfigError("autocorr: empty trace");
  if (count_ == 0 && length_ == 0) {
    dt_ = trace.dt;
    t_start_ = trace.t_start;
    length_ = trace.size();
    sum_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(length_),
                                 static_cast<Eigen::Index>(length_));
    block_.resize(static_cast<Eigen::Index>(length_), kBatch);
    pending_ = 0;
  }
  check_grid(trace, dt_, t_start_, length_);
  for (std::size_t k = 0; k < length_; ++k)
    block_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(pending_)) =
        trace.samples[k];
  if (++pending_ == kBatch) flush();
  ++count_;
}

void AutocorrAccumulator::flush() const {
  if (pending_ == 0) return;
  const auto cols = static_cast<Eigen::Index>(pending_);
  sum_.selfadjointView<Eigen::Lower>().rankUpdate(block_.leftCols(cols), 1.0);
  pending_ = 0;
}

void AutocorrAccumulator::merge(const AutocorrAccumulator& other) {
  if (other.count_ == 0) return;
  other.flush();
  if (count_ == 0 && length_ == 0) {
    dt_ = other.dt_;
    t_start_ = other.t_start_;
    length_ = other.length_;
    sum_ = other.sum_;
    block_.resize(static_cast<Eigen::Index>(length_), kBatch);
    pending_ = 0;
    count_ = other.count_;
    return;
  }
  if (length_ != other.length_ || std::abs(dt_ - other.dt_) > 1e-12 * dt_)
    throw ConfigError("autocorr: merging incompatible accumulators");
  flush();
  sum_ += other.sum_;
  count_ += other.count_;
}

AutocorrMatrix AutocorrAccumulator::finalize() const {
  if (count_ == 0) throw ConfigError("autocorr: no traces accumulated");
  flush();
  AutocorrMatrix k;
  k.entries = sum_.selfadjointView<Eigen::Lower>();
  k.entries /= static_cast<double>(count_);
  k.dt = dt_;
  k.t_start = t_start_;
  k.trace_count = count_;
  return k;
}

AutocorrMatrix autocorr_matrix(const std::vector<HomodyneTrace>& traces) {
  AutocorrAccumulator acc;
  for (const auto& t : traces) acc.add(t);
  return acc.finalize();
}

DominantModeResult dominant_mode(const AutocorrMatrix& k) {
  const Eigen::Index m = k.entries.rows();
  if (m == 0 || k.entries.cols() != m) throw ConfigError("dominant_mode: empty matrix");
  const double scale = k.entries.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw NumericalError("dominant_mode: zero matrix");
  if ((k.entries - k.entries.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw NumericalError("dominant_mode: matrix is not symmetric");

  // Power iteration from the column with the largest diagonal entry.
  Eigen::Index start = 0;
  k.entries.diagonal().maxCoeff(&start);
  Eigen::VectorXd v = k.entries.col(start);
  if (v.norm() == 0.0) v = Eigen::VectorXd::Ones(m);
  v.normalize();

  constexpr int kMaxIters = 20000;
  constexpr double kRelTol = 1e-10;
  double lambda = 0.0;
  int iters = 0;
  for (; iters < kMaxIters; ++iters) {
    Eigen::VectorXd w = k.entries.selfadjointView<Eigen::Lower>() * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) throw NumericalError("dominant_mode: power iteration collapsed");
    w /= norm;
    const bool converged = std::abs(next - lambda) <= kRelTol * std::abs(next) && iters > 1;
    lambda = next;
    v = w;
    if (converged) break;
  }
  if (iters >= kMaxIters)
    throw NumericalError("dominant_mode: power iteration did not converge");

  // Deflated iteration for the runner-up eigenvalue (degeneracy check only).
  Eigen::VectorXd u = k.entries.col(start == 0 ? std::min<Eigen::Index>(1, m - 1) : 0);
  u -= v * v.dot(u);
  double lambda2 = 0.0;
  if (u.norm() > 0.0) {
    u.normalize();
    for (int i = 0; i < 40; ++i) {
      Eigen::VectorXd w = k.entries.selfadjointView<Eigen::Lower>() * u;
      w -= v * v.dot(w);
      const double norm = w.norm();
      if (norm == 0.0) break;
      lambda2 = u.dot(k.entries.selfadjointView<Eigen::Lower>() * u);
      u = w / norm;
    }
  }

  DominantModeResult result;
  result.eigenvalue = lambda;
  result.second_eigenvalue = lambda2;
  result.iterations = iters + 1;
  result.degenerate_warning =
      std::abs(lambda) > 0.0 && std::abs(lambda - lambda2) < 1e-6 * std::abs(lambda);
  result.mode.dt = k.dt;
  result.mode.t_start = k.t_start;
  result.mode.samples.assign(v.data(), v.data() + m);
  normalize_mode(result.mode);
  return result;
}

double mode_mismatch(const TemporalMode& u, const TemporalMode& u_ref) {
  const bool same_grid = u.size() == u_ref.size() &&
                         std::abs(u.dt - u_ref.dt) < 1e-12 * u_ref.dt &&
                         std::abs(u.t_start - u_ref.t_start) < 0.5 * u_ref.dt;
  if (same_grid) return 1.0 - mode_overlap(u, u_ref);
  const TemporalMode resampled =
      interpolate_to_grid(u, u_ref.t_start, u_ref.dt, u_ref.size());
  return 1.0 - mode_overlap(resampled, u_ref);
}

}  // namespace cvhd
