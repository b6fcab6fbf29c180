// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace cvhd {

/// One digitized homodyne segment, shot-noise normalized. `true_phase` is the
/// generator ground truth; NaN for ingested external data.
struct HomodyneTrace {
  std::vector<double> samples;
  double dt = 0.0;
  double t_start = 0.0;
  double true_phase = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t trace_id = 0;

  std::size_t size() const { return samples.size(); }
  double time_at(std::size_t k) const { return t_start + static_cast<double>(k) * dt; }
  double t_end() const { return time_at(samples.empty() ? 0 : samples.size() - 1); }
  bool has_true_phase() const { return true_phase == true_phase; }
};

}  // namespace cvhd
