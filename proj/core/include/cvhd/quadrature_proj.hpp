// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "cvhd/config.hpp"
#include "cvhd/signal_model.hpp"
#include "cvhd/tomography.hpp"
#include "cvhd/trace.hpp"

namespace cvhd {

/// X = sum_k u_k v_k dt. Trace and mode must share the grid.
double project_quadrature(const HomodyneTrace& trace, const TemporalMode& mode);

struct PhaseEstimationModel {
  ScanModel scan;
  double squeezing_r = 0.0;        // background squeezing used for inversion
  double band_power_fraction = 1;  // mean |H|^2 of the chain over the trace band
  double electronic_variance = 0;  // quadrature units
  double variance_tolerance = 0.35;
  std::size_t min_side_samples = 200;
};

/// Estimates the LO phase of one native-rate trace from the squeezed-vacuum
/// side regions around [window_lo, window_hi): the per-sample mean square is
/// converted to a quadrature variance, inverted through V_sq(theta), and the
/// two-fold ambiguity is resolved by the measured side-to-side variance slope
/// against the known scan direction. Returns the phase at the window center,
/// in [0, pi) (V_sq cannot distinguish theta from theta+pi; the states
/// measured here are pi-periodic in theta).
double estimate_phase(const HomodyneTrace& trace, double window_lo, double window_hi,
                      const PhaseEstimationModel& model);

/// Tomography input set plus the metadata carried to the POVM.
struct TomoSet {
  std::vector<QuadratureSample> samples;
  double eta_hd = 1.0;
  double fc_hz = 0.0;
  double fs_sps = 0.0;
  std::uint64_t mode_hash = 0;
};

/// Projects windowed traces onto the mode; thetas[i] pairs with traces[i].
TomoSet collect_tomo_set(const std::vector<HomodyneTrace>& windowed_traces,
                         const TemporalMode& mode, const std::vector<double>& thetas,
                         double eta_hd);

}  // namespace cvhd
