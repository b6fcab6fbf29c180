// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

namespace cvhd::fft {

/// Forward real-to-complex DFT (unnormalized, FFTW convention).
/// Returns n/2+1 bins.
std::vector<std::complex<double>> rfft(const std::vector<double>& in);

/// Inverse complex-to-real DFT, normalized so irfft(rfft(x), n) == x.
/// `spectrum` is modified in place by FFTW; pass a copy if it must survive.
std::vector<double> irfft(std::vector<std::complex<double>> spectrum, std::size_t n);

}  // namespace cvhd::fft
