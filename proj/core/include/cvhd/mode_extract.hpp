// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <vector>

#include "cvhd/signal_model.hpp"
#include "cvhd/trace.hpp"

namespace cvhd {

/// Temporal autocorrelation matrix K[j,k] = (1/N) sum_i v_i(t_j) v_i(t_k).
struct AutocorrMatrix {
  Eigen::MatrixXd entries;
  double dt = 0.0;
  double t_start = 0.0;
  std::size_t trace_count = 0;
};

/// Streaming accumulation of K: traces never need to be co-resident, and
/// partial accumulators merge commutatively.
class AutocorrAccumulator {
 public:
  void add(const HomodyneTrace& trace);
  void merge(const AutocorrAccumulator& other);
  AutocorrMatrix finalize() const;
  std::size_t count() const { return count_; }

 private:
  void flush() const;

  mutable Eigen::MatrixXd sum_;
  mutable Eigen::MatrixXd block_;  // batched traces pending a rank update
  mutable std::size_t pending_ = 0;
  std::size_t count_ = 0;
  double dt_ = 0.0;
  double t_start_ = 0.0;
  std::size_t length_ = 0;
};

AutocorrMatrix autocorr_matrix(const std::vector<HomodyneTrace>& traces);

struct DominantModeResult {
  TemporalMode mode;
  double eigenvalue = 0.0;
  double second_eigenvalue = 0.0;
  int iterations = 0;
  bool degenerate_warning = false;  // relative eigenvalue gap < 1e-6
};

/// Eigenvector of the largest eigenvalue by power iteration (relative
/// eigenvalue tolerance 1e-10), rescaled to sum u^2 dt = 1, positive peak.
DominantModeResult dominant_mode(const AutocorrMatrix& k);

/// 1 - |sum u_k uref_k dt| with both modes normalized; u is linearly
/// interpolated onto u_ref's grid (and renormalized) when the grids differ.
double mode_mismatch(const TemporalMode& u, const TemporalMode& u_ref);

}  // namespace cvhd
