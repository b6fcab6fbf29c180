// SPDX-License-Identifier: Apache-2.0
#include "cvhd/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "cvhd/errors.hpp"

namespace cvhd::fft {
namespace {

// FFTW's planner is not thread-safe; plan creation is serialized. Executing a
// plan on its own buffers is safe, so each thread keeps its own workspace per
// transform size. FFTW_ESTIMATE keeps plans deterministic.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Workspace {
  std::size_t n = 0;
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  explicit Workspace(std::size_t size) : n(size) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    real = fftw_alloc_real(n);
    cplx = fftw_alloc_complex(n / 2 + 1);
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, cplx, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx, real, FFTW_ESTIMATE);
  }
  ~Workspace() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(real);
    fftw_free(cplx);
  }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
};

Workspace& workspace_for(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<Workspace>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<Workspace>(n)).first;
  return *it->second;
}

}  // namespace

std::vector<std::complex<double>> rfft(const std::vector<double>& in) {
  if (in.empty()) throw NumericalError("rfft: empty input");
  Workspace& ws = workspace_for(in.size());
  std::memcpy(ws.real, in.data(), in.size() * sizeof(double));
  fftw_execute(ws.fwd);
  std::vector<std::complex<double>> out(in.size() / 2 + 1);
  // std::complex<double> is layout-compatible with fftw_complex (double[2]).
  std::memcpy(reinterpret_cast<double*>(out.data()), ws.cplx,
              out.size() * sizeof(fftw_complex));
  return out;
}

std::vector<double> irfft(std::vector<std::complex<double>> spectrum, std::size_t n) {
  if (n == 0 || spectrum.size() != n / 2 + 1)
    throw NumericalError("irfft: spectrum size does not match n");
  Workspace& ws = workspace_for(n);
  std::memcpy(ws.cplx, reinterpret_cast<const double*>(spectrum.data()),
              spectrum.size() * sizeof(fftw_complex));
  fftw_execute(ws.bwd);
  std::vector<double> out(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = ws.real[i] * scale;
  return out;
}

}  // namespace cvhd::fft
