// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cvhd/rng.hpp"
#include "cvhd/signal_model.hpp"
#include "cvhd/trace.hpp"

namespace cvhd::dsp {

/// Zero-phase magnitude filtering: DFT of the samples, multiply bin k by
/// H(f_k), inverse DFT. Length, dt and phase metadata unchanged.
HomodyneTrace apply_bandwidth(const HomodyneTrace& trace, const ButterworthSpec& spec);

/// Keeps samples o, o+n, o+2n, ... with the offset o drawn uniformly in
/// {0,...,n-1} per trace. No anti-alias pre-filter; dt becomes n*dt,
/// t_start advances by o*dt.
HomodyneTrace decimate(const HomodyneTrace& trace, std::size_t n, CounterRng& rng);

/// Contiguous sub-trace covering [t_lo, t_hi), boundaries snapped to the
/// nearest sample.
HomodyneTrace extract_window(const HomodyneTrace& trace, double t_lo, double t_hi);

}  // namespace cvhd::dsp
