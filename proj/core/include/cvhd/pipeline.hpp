// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cvhd/config.hpp"
#include "cvhd/mode_extract.hpp"
#include "cvhd/quadrature_proj.hpp"
#include "cvhd/tomography.hpp"
#include "cvhd/trace_synth.hpp"

namespace cvhd {

enum class ModeSource { kReconstructed, kIdeal };
enum class PhaseSource { kTruth, kEstimated };
enum class EfficiencyMode { kPovm, kRescale };

struct PipelineOptions {
  ModeSource mode_source = ModeSource::kReconstructed;
  PhaseSource phase_source = PhaseSource::kTruth;
  EfficiencyMode efficiency_mode = EfficiencyMode::kPovm;
  int maxlik_iters = 1000;
  int workers = 0;  // 0 = hardware concurrency

  static PipelineOptions from_config(const AcquisitionConfig& cfg);
};

/// Native-rate trace source: synthesized in memory (default), regenerated on
/// demand (cache_traces = false), or loaded from a CVTR dataset file. Output
/// is identical across the three, trace by trace.
class TraceProvider {
 public:
  explicit TraceProvider(const AcquisitionConfig& cfg, bool cache_traces = true);
  static TraceProvider from_file(const std::string& path, const AcquisitionConfig& cfg);

  std::uint64_t count() const { return count_; }
  double dt() const { return dt_; }
  double t_start() const { return t_start_; }
  std::size_t samples_per_trace() const { return samples_per_trace_; }

  HomodyneTrace trace(std::uint64_t i) const;
  /// Ground-truth phase (NaN when the dataset came from a file without it).
  double theta(std::uint64_t i) const;

 private:
  TraceProvider() = default;

  std::shared_ptr<const TraceSynthesizer> synth_;  // null for file datasets
  std::shared_ptr<const std::vector<double>> cache_;
  std::shared_ptr<const std::vector<double>> phases_;
  std::shared_ptr<const std::vector<std::uint64_t>> ids_;
  std::uint64_t count_ = 0;
  double dt_ = 0.0;
  double t_start_ = 0.0;
  std::size_t samples_per_trace_ = 0;
};

struct PointSpec {
  double fc_hz = 0.0;
  std::size_t decim = 1;
};

/// Per-(f_c, f_s) record emitted by the sweep.
struct SweepResult {
  double fc_hz = 0.0;
  double fs_sps = 0.0;
  bool nyquist_ok = false;  // 2 f_c <= f_s, exactly
  double w00 = 0.0;
  double fidelity_vs_baseline = 0.0;
  double mode_mismatch_vs_baseline = 0.0;
  int maxlik_converged_at = 0;
  // Extras (results.json only, not part of the heatmap schema).
  double wigner_overlap_vs_baseline = 0.0;
  double mode_top_eigenvalue = 0.0;
  bool mode_degenerate_warning = false;
  bool ok = true;
  std::string error;
};

struct PointOutput {
  SweepResult result;
  TemporalMode mode;       // mode used for projection, on the point's grid
  DensityMatrix rho;
  std::vector<double> loglik;
};

/// Full processing of one grid point: filter, decimate, window, extract the
/// dominant mode, project, MaxLik. `phases` are the per-trace LO phases
/// (precomputed once per dataset). Pass baseline = nullptr when computing the
/// baseline itself.
PointOutput run_point(const TraceProvider& provider, const AcquisitionConfig& cfg,
                      const PointSpec& point, const std::vector<double>& phases,
                      const PipelineOptions& options, const PointOutput* baseline);

/// Per-trace LO phases from ground truth or side-region estimation.
std::vector<double> resolve_phases(const TraceProvider& provider,
                                   const AcquisitionConfig& cfg, PhaseSource source);

struct SweepOutput {
  std::vector<PointOutput> points;  // baseline first, then grid order
  std::size_t baseline_index = 0;
  double wall_seconds = 0.0;
};

SweepOutput run_sweep(const TraceProvider& provider, const AcquisitionConfig& cfg,
                      const std::vector<double>& fc_list, const std::vector<std::size_t>& n_list,
                      const PipelineOptions& options);

struct CalibrationOptions {
  double tolerance = 5e-3;            // full-pipeline |W00 - target|
  double surrogate_tolerance = 2e-3;
  double r_min = 0.0;
  double r_max = 0.75;  // keeps the Fock tail below threshold at cutoff 12
  int surrogate_iters = 400;
  int max_surrogate_evals = 48;
  int max_full_evals = 6;
};

struct CalibrationReport {
  HeraldedStateModel model;
  double target_w00 = 0.0;
  double achieved_w00 = 0.0;  // full ideal-chain pipeline at the returned model
  int surrogate_evals = 0;
  int full_evals = 0;
  bool degenerate_gaussian = false;
  std::string note;
};

/// Bisection over r (then xi if the target is out of range) until the
/// ideal-chain pipeline (native f_c/f_s, analytic phases, POVM-corrected)
/// reproduces the target W(0,0) within tolerance.
CalibrationReport calibrate_state(double target_w00, const AcquisitionConfig& base,
                                  const CalibrationOptions& options = {});

/// Writes heatmap CSV, per-point mode CSVs, Wigner/density CSVs for the
/// designated four panels, results.json and the run manifest.
void emit_reports(const SweepOutput& sweep, const AcquisitionConfig& cfg,
                  const std::vector<double>& fc_list, const std::vector<std::size_t>& n_list,
                  const PipelineOptions& options, const std::string& out_dir,
                  const CalibrationReport* calibration = nullptr);

}  // namespace cvhd
