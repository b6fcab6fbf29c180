// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace cvhd {

/// Sampled real temporal profile u(t), normalized to unit square integral
/// (sum u_k^2 dt = 1). Sign convention: the sample of largest magnitude is
/// positive.
struct TemporalMode {
  std::vector<double> samples;
  double dt = 0.0;       // seconds per sample
  double t_start = 0.0;  // time of first sample relative to trigger

  std::size_t size() const { return samples.size(); }
  double time_at(std::size_t k) const { return t_start + static_cast<double>(k) * dt; }
  double t_end() const { return time_at(samples.empty() ? 0 : samples.size() - 1); }
};

/// Second-order Butterworth magnitude response.
struct ButterworthSpec {
  double f_c_hz = 0.0;  // -3 dB cutoff
  double g0 = 1.0;      // low-frequency gain
};

/// sum u_k^2 dt.
double mode_norm_sq(const TemporalMode& mode);

/// Rescales to sum u_k^2 dt = 1 and fixes the positive-peak sign convention.
void normalize_mode(TemporalMode& mode);

/// |<u, v>| = |sum u_k v_k dt| for modes on the same grid.
double mode_overlap(const TemporalMode& a, const TemporalMode& b);

/// Linear interpolation onto a target grid followed by renormalization.
/// Points outside the source support read as zero.
TemporalMode interpolate_to_grid(const TemporalMode& mode, double t_start, double dt,
                                 std::size_t n);

/// H(f, f_c) = g0 / sqrt(1 + (f/f_c)^4). Even in f.
double butterworth_gain(double f_hz, const ButterworthSpec& spec);

/// Causal one-sided exponential detection mode
///   u(t) = sqrt(2 kappa) exp(kappa (t - t0)) for t <= t0, 0 after,
/// with kappa = pi * Gamma so the -3 dB width of |u~(f)|^2 equals Gamma.
/// The grid covers [t0 - span, t0 + span/8].
TemporalMode ideal_mode(double gamma_hz, double t0_s, double dt_s, double span_s);

/// Same profile evaluated on an explicit grid (used to place the mode on a
/// trace grid). Throws if the grid truncates more than 1% of the mode energy.
TemporalMode ideal_mode_on_grid(double gamma_hz, double t0_s, double t_start_s, double dt_s,
                                std::size_t n);

/// Zero-phase magnitude filtering of a normalized mode: DFT, multiply by the
/// real even gain H, inverse DFT, renormalize.
TemporalMode filtered_ideal_mode(const TemporalMode& mode, const ButterworthSpec& spec);

/// Full -3 dB width of the spectral density |u~(f)|^2, computed on an
/// 8x zero-padded DFT grid with linear interpolation at the crossings.
double spectral_bandwidth(const TemporalMode& mode);

/// Full width at half maximum of u^2(t), linear interpolation at crossings.
double half_energy_width(const TemporalMode& mode);

}  // namespace cvhd
