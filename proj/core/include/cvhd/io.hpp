// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "cvhd/quadrature_proj.hpp"
#include "cvhd/signal_model.hpp"
#include "cvhd/tomography.hpp"
#include "cvhd/trace.hpp"
#include "cvhd/trace_synth.hpp"

namespace cvhd::io {

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t mode_hash(const TemporalMode& mode);

/// Deterministic decimal formatting used by every emitted file.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Trace dataset file: header (magic "CVTR", version, N, dt, t_start,
// samples-per-trace, config hash) followed by per-trace records
// (trace_id: u64, true_phase: f64, samples: f64 little-endian array).

struct DatasetHeader {
  std::uint32_t version = 1;
  std::uint64_t n_traces = 0;
  double dt = 0.0;
  double t_start = 0.0;
  std::uint64_t samples_per_trace = 0;
  std::uint64_t config_hash = 0;
};

class DatasetWriter {
 public:
  DatasetWriter(const std::string& path, const DatasetHeader& header);
  void write(const HomodyneTrace& trace);
  ~DatasetWriter();

 private:
  std::ofstream out_;
  DatasetHeader header_;
  std::uint64_t written_ = 0;
};

class DatasetReader {
 public:
  explicit DatasetReader(const std::string& path);
  const DatasetHeader& header() const { return header_; }
  /// Reads the next record; false at end of file.
  bool read_next(HomodyneTrace& trace);

 private:
  std::ifstream in_;
  DatasetHeader header_;
  std::uint64_t read_ = 0;
};

// ---------------------------------------------------------------------------
// CSV emitters (all deterministic byte-for-byte for identical inputs).

void write_truth_csv(const std::string& path, const std::vector<TruthRecord>& records);
void write_mode_csv(const std::string& path, const TemporalMode& mode);
void write_samples_csv(const std::string& path, const TomoSet& set);
/// Sidecar metadata record for a tomography input file.
void write_samples_sidecar(const std::string& path, const TomoSet& set);
void write_density_csv(const std::string& path, const DensityMatrix& rho);
void write_wigner_csv(const std::string& path, const WignerGrid& grid);

}  // namespace cvhd::io
