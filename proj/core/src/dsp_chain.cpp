// SPDX-License-Identifier: Apache-2.0
#include "cvhd/dsp_chain.hpp"

#include <cmath>

#include "cvhd/errors.hpp"
#include "cvhd/fft.hpp"

namespace cvhd::dsp {

HomodyneTrace apply_bandwidth(const HomodyneTrace& trace, const ButterworthSpec& spec) {
  if (trace.samples.empty()) throw ConfigError("apply_bandwidth: empty trace");
  const std::size_t n = trace.size();
  auto spectrum = fft::rfft(trace.samples);
  const double df = 1.0 / (static_cast<double>(n) * trace.dt);
  for (std::size_t k = 0; k < spectrum.size(); ++k)
    spectrum[k] *= butterworth_gain(static_cast<double>(k) * df, spec);
  HomodyneTrace out = trace;
  out.samples = fft::irfft(std::move(spectrum), n);
  return out;
}

HomodyneTrace decimate(const HomodyneTrace& trace, std::size_t n, CounterRng& rng) {
  if (n == 0) throw ConfigError("decimate: n must be >= 1");
  if (n > trace.size()) throw ConfigError("decimate: n exceeds the sample count");
  const std::size_t offset = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
  HomodyneTrace out;
  out.dt = trace.dt * static_cast<double>(n);
  out.t_start = trace.t_start + static_cast<double>(offset) * trace.dt;
  out.true_phase = trace.true_phase;
  out.trace_id = trace.trace_id;
  out.samples.reserve((trace.size() - offset + n - 1) / n);
  for (std::size_t k = offset; k < trace.size(); k += n) out.samples.push_back(trace.samples[k]);
  return out;
}

HomodyneTrace extract_window(const HomodyneTrace& trace, double t_lo, double t_hi) {
  if (trace.samples.empty()) throw ConfigError("extract_window: empty trace");
  if (t_hi <= t_lo) throw ConfigError("extract_window: empty window");
  if (t_lo < trace.t_start - 0.5 * trace.dt || t_hi > trace.t_end() + 1.5 * trace.dt)
    throw ConfigError("extract_window: window outside the trace span");
  // Boundaries snap to the nearest sample; [t_lo, t_hi) half open.
  const auto snap = [&](double t) {
    const double pos = (t - trace.t_start) / trace.dt;
    return static_cast<std::ptrdiff_t>(std::ceil(pos - 0.5));
  };
  std::ptrdiff_t first = std::max<std::ptrdiff_t>(0, snap(t_lo));
  std::ptrdiff_t last = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(trace.size()),
                                                 snap(t_hi));
  if (last <= first) throw ConfigError("extract_window: window contains no samples");
  HomodyneTrace out;
  out.dt = trace.dt;
  out.t_start = trace.t_start + static_cast<double>(first) * trace.dt;
  out.true_phase = trace.true_phase;
  out.trace_id = trace.trace_id;
  out.samples.assign(trace.samples.begin() + first, trace.samples.begin() + last);
  return out;
}

}  // namespace cvhd::dsp
