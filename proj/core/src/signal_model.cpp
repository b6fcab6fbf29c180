// SPDX-License-Identifier: Apache-2.0
#include "cvhd/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cvhd/errors.hpp"
#include "cvhd/fft.hpp"

namespace cvhd {

namespace {
constexpr double kPi = std::numbers::pi;

void require_finite(const TemporalMode& mode, const char* who) {
  for (double v : mode.samples)
    if (!std::isfinite(v)) throw NumericalError(std::string(who) + ": non-finite sample");
}

void require_normalized(const TemporalMode& mode, const char* who) {
  const double s = mode_norm_sq(mode);
  if (std::abs(s - 1.0) > 1e-6)
    throw ConfigError(std::string(who) + ": mode is not normalized (sum u^2 dt = " +
                      std::to_string(s) + ")");
}
}  // namespace

double mode_norm_sq(const TemporalMode& mode) {
  double s = 0.0;
  for (double v : mode.samples) s += v * v;
  return s * mode.dt;
}

void normalize_mode(TemporalMode& mode) {
  require_finite(mode, "normalize_mode");
  const double s = mode_norm_sq(mode);
  if (s <= 0.0) throw NumericalError("normalize_mode: zero mode");
  const double inv = 1.0 / std::sqrt(s);
  std::size_t peak = 0;
  double peak_abs = 0.0;
  for (std::size_t k = 0; k < mode.samples.size(); ++k) {
    const double a = std::abs(mode.samples[k]);
    if (a > peak_abs) {
      peak_abs = a;
      peak = k;
    }
  }
  const double sign = mode.samples[peak] < 0.0 ? -1.0 : 1.0;
  for (double& v : mode.samples) v *= inv * sign;
}

double mode_overlap(const TemporalMode& a, const TemporalMode& b) {
  if (a.size() != b.size() || std::abs(a.dt - b.dt) > 1e-12 * std::max(a.dt, b.dt))
    throw ConfigError("mode_overlap: grid mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a.samples[k] * b.samples[k];
  return std::abs(s * a.dt);
}

TemporalMode interpolate_to_grid(const TemporalMode& mode, double t_start, double dt,
                                 std::size_t n) {
  if (n == 0 || dt <= 0.0) throw ConfigError("interpolate_to_grid: bad target grid");
  TemporalMode out;
  out.dt = dt;
  out.t_start = t_start;
  out.samples.resize(n, 0.0);
  const double src_start = mode.t_start;
  const double src_end = mode.t_end();
  bool any = false;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t_start + static_cast<double>(k) * dt;
    if (t < src_start || t > src_end) continue;
    const double pos = (t - src_start) / mode.dt;
    const std::size_t i = std::min(static_cast<std::size_t>(pos), mode.size() - 2);
    const double frac = pos - static_cast<double>(i);
    out.samples[k] = (1.0 - frac) * mode.samples[i] + frac * mode.samples[i + 1];
    any = true;
  }
  if (!any) throw ConfigError("interpolate_to_grid: non-overlapping time supports");
  normalize_mode(out);
  return out;
}

double butterworth_gain(double f_hz, const ButterworthSpec& spec) {
  if (spec.f_c_hz <= 0.0) throw ConfigError("butterworth_gain: f_c must be positive");
  if (spec.g0 <= 0.0) throw ConfigError("butterworth_gain: G0 must be positive");
  const double r = f_hz / spec.f_c_hz;
  const double r2 = r * r;
  return spec.g0 / std::sqrt(1.0 + r2 * r2);
}

TemporalMode ideal_mode_on_grid(double gamma_hz, double t0_s, double t_start_s, double dt_s,
                                std::size_t n) {
  if (gamma_hz <= 0.0) throw ConfigError("ideal_mode: Gamma must be positive");
  if (dt_s <= 0.0) throw ConfigError("ideal_mode: dt must be positive");
  if (n < 2) throw ConfigError("ideal_mode: grid too small");
  const double kappa = kPi * gamma_hz;
  // Energy of the continuous profile before the grid start must be < 1%.
  const double lead = t0_s - t_start_s;
  if (lead <= 0.0 || std::exp(-2.0 * kappa * lead) > 0.01)
    throw ConfigError("ideal_mode: span too short to contain >= 99% of the mode energy");
  TemporalMode mode;
  mode.dt = dt_s;
  mode.t_start = t_start_s;
  mode.samples.resize(n, 0.0);
  const double amp = std::sqrt(2.0 * kappa);
  // Tolerate round-off when t0 falls on a grid point.
  const double t0_eff = t0_s + 1e-6 * dt_s;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = mode.time_at(k);
    mode.samples[k] = t <= t0_eff ? amp * std::exp(kappa * std::min(0.0, t - t0_s)) : 0.0;
  }
  normalize_mode(mode);
  return mode;
}

TemporalMode ideal_mode(double gamma_hz, double t0_s, double dt_s, double span_s) {
  if (span_s <= 0.0) throw ConfigError("ideal_mode: span must be positive");
  const double t_start = t0_s - span_s;
  const std::size_t n = static_cast<std::size_t>(std::llround(span_s * 1.125 / dt_s)) + 1;
  return ideal_mode_on_grid(gamma_hz, t0_s, t_start, dt_s, n);
}

TemporalMode filtered_ideal_mode(const TemporalMode& mode, const ButterworthSpec& spec) {
  require_normalized(mode, "filtered_ideal_mode");
  const std::size_t n = mode.size();
  auto spectrum = fft::rfft(mode.samples);
  const double df = 1.0 / (static_cast<double>(n) * mode.dt);
  for (std::size_t k = 0; k < spectrum.size(); ++k)
    spectrum[k] *= butterworth_gain(static_cast<double>(k) * df, spec);
  TemporalMode out = mode;
  out.samples = fft::irfft(std::move(spectrum), n);
  normalize_mode(out);
  return out;
}

double spectral_bandwidth(const TemporalMode& mode) {
  require_normalized(mode, "spectral_bandwidth");
  const std::size_t n = mode.size();
  if (n < 2) throw ConfigError("spectral_bandwidth: degenerate mode");
  const std::size_t padded = 8 * n;
  std::vector<double> buf(padded, 0.0);
  std::copy(mode.samples.begin(), mode.samples.end(), buf.begin());
  auto spectrum = fft::rfft(buf);
  std::vector<double> power(spectrum.size());
  for (std::size_t k = 0; k < spectrum.size(); ++k) power[k] = std::norm(spectrum[k]);
  const std::size_t peak =
      static_cast<std::size_t>(std::max_element(power.begin(), power.end()) - power.begin());
  const double half = power[peak] * 0.5;
  const double df = 1.0 / (static_cast<double>(padded) * mode.dt);

  // Walk outward from the peak; linear interpolation at the half crossings.
  double hi = static_cast<double>(power.size() - 1);
  for (std::size_t k = peak; k + 1 < power.size(); ++k) {
    if (power[k + 1] < half) {
      hi = static_cast<double>(k) + (power[k] - half) / (power[k] - power[k + 1]);
      break;
    }
  }
  double lo = 0.0;
  bool touches_dc = true;
  for (std::size_t k = peak; k > 0; --k) {
    if (power[k - 1] < half) {
      lo = static_cast<double>(k) - (power[k] - half) / (power[k] - power[k - 1]);
      touches_dc = false;
      break;
    }
  }
  // Real mode: spectrum is even in f. A band touching DC spans [-hi, hi];
  // otherwise the two-sided support is +/-[lo, hi].
  return touches_dc ? 2.0 * hi * df : 2.0 * (hi - lo) * df;
}

double half_energy_width(const TemporalMode& mode) {
  const std::size_t n = mode.size();
  if (n < 2) throw ConfigError("half_energy_width: degenerate mode");
  std::vector<double> p(n);
  for (std::size_t k = 0; k < n; ++k) p[k] = mode.samples[k] * mode.samples[k];
  const std::size_t peak =
      static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  const double half = p[peak] * 0.5;
  double hi = static_cast<double>(n - 1);
  for (std::size_t k = peak; k + 1 < n; ++k) {
    if (p[k + 1] < half) {
      hi = static_cast<double>(k) + (p[k] - half) / (p[k] - p[k + 1]);
      break;
    }
  }
  double lo = 0.0;
  for (std::size_t k = peak; k > 0; --k) {
    if (p[k - 1] < half) {
      lo = static_cast<double>(k) - (p[k] - half) / (p[k] - p[k - 1]);
      break;
    }
  }
  return (hi - lo) * mode.dt;
}

}  // namespace cvhd
