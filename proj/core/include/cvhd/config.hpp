// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

namespace cvhd {

/// Heralded photon-subtracted squeezed-vacuum state model:
/// L_eta_prep[ S(r) (xi |1><1| + (1-xi)|0><0|) S(r)^dag ].
struct HeraldedStateModel {
  double r = 0.398;         // squeezing parameter (calibrated default)
  double xi = 1.0;          // modal purity: weight of the photon-subtracted part
  double eta_prep = 0.77;   // preparation efficiency
  int fock_cutoff = 12;

  void validate() const;
};

/// Linear LO phase scan. theta_i = offset + rate * (i * trigger_period),
/// wrapped to [0, 2pi). The default rate advances the phase by a golden-ratio
/// fraction of 2pi per trigger, which covers [0, 2pi) uniformly while drifting
/// only ~0.26 rad across one synthesized trace.
struct ScanModel {
  double rate_rad_per_s = 342256.5447653715;  // 2*pi*13.6180339887 / 250 us
  double offset_rad = 0.1;
  double trigger_period_s = 2.5e-4;
};

struct AcquisitionConfig {
  double gamma_hz = 9.3e6;   // heralding filter line-width
  double f_c_hz = 301e6;     // native detection-chain bandwidth
  double f_s_sps = 5e9;      // native digitizer rate
  std::uint64_t n_traces = 10000;
  double trace_span_s = 5e-6;     // nominal full trace duration
  double side_region_s = 0.5e-6;  // synthesized region on each side of the window
  bool full_span = false;         // synthesize the whole nominal duration
  double window_lo_s = -1.25e-6;
  double window_hi_s = -1.0e-6;
  double t0_s = -1.05e-6;  // heralding instant relative to trigger
  double snr_db = 12.0;    // vacuum level over electronic noise
  double eta_hd = 0.72;    // homodyne detection efficiency
  ScanModel scan;
  HeraldedStateModel state;
  std::uint64_t seed = 20260808;

  // Processing options.
  std::string phase_source = "truth";    // truth | estimated
  std::string efficiency_mode = "povm";  // povm | rescale
  int maxlik_iters = 1000;
  int workers = 0;  // 0 = hardware concurrency

  void validate() const;

  double dt() const { return 1.0 / f_s_sps; }
  double synth_t_start() const {
    return full_span ? -trace_span_s : window_lo_s - side_region_s;
  }
  double synth_t_end() const { return full_span ? 0.0 : window_hi_s + side_region_s; }
  std::size_t synth_samples() const;
  /// Electronic noise variance in quadrature units (vacuum = 1/2).
  double electronic_variance() const;
};

AcquisitionConfig load_config(const std::string& path);
std::string config_to_json(const AcquisitionConfig& cfg);
std::uint64_t config_hash(const AcquisitionConfig& cfg);
/// Hash over the fields that determine trace contents (grid, noise, state,
/// scan, seed); stored in dataset files and checked on ingestion.
std::uint64_t synthesis_hash(const AcquisitionConfig& cfg);

}  // namespace cvhd
