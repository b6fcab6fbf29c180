// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cvhd/dsp_chain.hpp"
#include "cvhd/errors.hpp"
#include "cvhd/io.hpp"
#include "cvhd/pipeline.hpp"

using namespace cvhd;

namespace {
/// Reduced-rate configuration that keeps end-to-end runs fast.
AcquisitionConfig small_config(std::uint64_t n_traces = 2500) {
  AcquisitionConfig cfg;
  cfg.f_s_sps = 1e9;
  cfg.side_region_s = 0.3e-6;
  cfg.n_traces = n_traces;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}
}  // namespace

TEST_CASE("baseline point produces a physical negative-Wigner state") {
  AcquisitionConfig cfg = small_config();
  TraceProvider provider(cfg, true);
  PipelineOptions options = PipelineOptions::from_config(cfg);
  auto phases = resolve_phases(provider, cfg, PhaseSource::kTruth);
  PointOutput out = run_point(provider, cfg, {cfg.f_c_hz, 1}, phases, options, nullptr);
  out.rho.validate(1e-10, 1e-10, 1e-10);
  CHECK(out.result.w00 < -0.02);
  CHECK(out.result.nyquist_ok);
  CHECK(mode_norm_sq(out.mode) == doctest::Approx(1.0).epsilon(1e-9));
  for (std::size_t k = 1; k < out.loglik.size(); ++k)
    CHECK(out.loglik[k] >= out.loglik[k - 1] - 1e-9);

  // Bitwise reproducibility of the full point.
  PointOutput again = run_point(provider, cfg, {cfg.f_c_hz, 1}, phases, options, nullptr);
  CHECK(again.result.w00 == out.result.w00);
  CHECK((again.rho.m - out.rho.m).cwiseAbs().maxCoeff() == 0.0);
  CHECK(again.mode.samples == out.mode.samples);
}

TEST_CASE("cached and on-demand providers emit identical traces") {
  AcquisitionConfig cfg = small_config(40);
  TraceProvider cached(cfg, true);
  TraceProvider lazy(cfg, false);
  for (std::uint64_t i = 0; i < cfg.n_traces; i += 7) {
    HomodyneTrace a = cached.trace(i);
    HomodyneTrace b = lazy.trace(i);
    CHECK(a.samples == b.samples);
    CHECK(a.true_phase == b.true_phase);
  }
}

TEST_CASE("dataset file round trips through the provider") {
  AcquisitionConfig cfg = small_config(30);
  const auto path = std::filesystem::temp_directory_path() / "cvhd_provider.cvtr";
  io::DatasetHeader header;
  header.n_traces = cfg.n_traces;
  header.dt = cfg.dt();
  header.t_start = cfg.synth_t_start();
  header.samples_per_trace = cfg.synth_samples();
  header.config_hash = synthesis_hash(cfg);
  {
    io::DatasetWriter writer(path.string(), header);
    synth_dataset(cfg, [&](HomodyneTrace&& t, const TruthRecord&) { writer.write(t); });
  }
  TraceProvider from_file = TraceProvider::from_file(path.string(), cfg);
  TraceProvider direct(cfg, true);
  CHECK(from_file.count() == cfg.n_traces);
  for (std::uint64_t i = 0; i < cfg.n_traces; i += 5) {
    CHECK(from_file.trace(i).samples == direct.trace(i).samples);
    CHECK(from_file.theta(i) == direct.theta(i));
  }
  AcquisitionConfig other = cfg;
  other.seed += 1;
  CHECK_THROWS_AS(TraceProvider::from_file(path.string(), other), ConfigError);
}

TEST_CASE("reconstructed mode matches the filtered ideal profile end to end") {
  // Dominant autocorrelation eigenmode of a native-rate synthetic dataset
  // overlaps the band-limited ideal mode.
  AcquisitionConfig cfg;
  cfg.n_traces = 10000;
  TraceProvider provider(cfg, true);
  PipelineOptions options = PipelineOptions::from_config(cfg);
  options.workers = 2;
  auto phases = resolve_phases(provider, cfg, PhaseSource::kTruth);
  PointOutput out = run_point(provider, cfg, {cfg.f_c_hz, 1}, phases, options, nullptr);

  TemporalMode uid = ideal_mode_on_grid(cfg.gamma_hz, cfg.t0_s, provider.t_start(),
                                        provider.dt(), provider.samples_per_trace());
  TemporalMode ufc = filtered_ideal_mode(uid, {cfg.f_c_hz, 1.0});
  HomodyneTrace carrier;
  carrier.samples = ufc.samples;
  carrier.dt = ufc.dt;
  carrier.t_start = ufc.t_start;
  HomodyneTrace win = dsp::extract_window(carrier, cfg.window_lo_s, cfg.window_hi_s);
  TemporalMode ufc_win{win.samples, win.dt, win.t_start};
  normalize_mode(ufc_win);
  CHECK(mode_overlap(out.mode, ufc_win) >= 0.98);
}

TEST_CASE("ground-truth and estimated phases agree through tomography") {
  // Clean data: negligible electronic noise, moderate squeezing, and
  // paper-length side regions so the phase estimator has full statistics.
  AcquisitionConfig cfg = small_config(4000);
  cfg.side_region_s = 2.0e-6;
  cfg.state.r = 0.5;
  cfg.state.xi = 1.0;
  cfg.state.eta_prep = 0.77;
  cfg.snr_db = 600.0;
  TraceProvider provider(cfg, true);
  PipelineOptions options = PipelineOptions::from_config(cfg);
  auto truth = resolve_phases(provider, cfg, PhaseSource::kTruth);
  auto estimated = resolve_phases(provider, cfg, PhaseSource::kEstimated);
  PointOutput a = run_point(provider, cfg, {cfg.f_c_hz, 1}, truth, options, nullptr);
  PointOutput b = run_point(provider, cfg, {cfg.f_c_hz, 1}, estimated, options, nullptr);
  CHECK(std::abs(a.result.w00 - b.result.w00) < 0.01);
}

TEST_CASE("povm efficiency handling is more negative than rescaling") {
  AcquisitionConfig cfg = small_config(2500);
  TraceProvider provider(cfg, true);
  auto phases = resolve_phases(provider, cfg, PhaseSource::kTruth);
  PipelineOptions povm = PipelineOptions::from_config(cfg);
  PipelineOptions rescale = povm;
  rescale.efficiency_mode = EfficiencyMode::kRescale;
  PointOutput a = run_point(provider, cfg, {cfg.f_c_hz, 1}, phases, povm, nullptr);
  PointOutput b = run_point(provider, cfg, {cfg.f_c_hz, 1}, phases, rescale, nullptr);
  // Rescaling inflates the variance, washing out negativity relative to the
  // loss-aware POVM.
  CHECK(a.result.w00 < b.result.w00);
  b.rho.validate(1e-10, 1e-10, 1e-10);
}

TEST_CASE("ideal mode source projects with the resampled theoretical profile") {
  AcquisitionConfig cfg = small_config(1500);
  TraceProvider provider(cfg, true);
  auto phases = resolve_phases(provider, cfg, PhaseSource::kTruth);
  PipelineOptions options = PipelineOptions::from_config(cfg);
  options.mode_source = ModeSource::kIdeal;
  PointOutput out = run_point(provider, cfg, {cfg.f_c_hz, 13}, phases, options, nullptr);
  CHECK(out.result.fs_sps == doctest::Approx(cfg.f_s_sps / 13.0));
  // The projection mode must be the windowed, resampled ideal profile.
  TemporalMode uid = ideal_mode_on_grid(cfg.gamma_hz, cfg.t0_s, provider.t_start(),
                                        provider.dt(), provider.samples_per_trace());
  HomodyneTrace carrier;
  carrier.samples = uid.samples;
  carrier.dt = uid.dt;
  carrier.t_start = uid.t_start;
  HomodyneTrace win = dsp::extract_window(carrier, cfg.window_lo_s, cfg.window_hi_s);
  TemporalMode uid_win{win.samples, win.dt, win.t_start};
  normalize_mode(uid_win);
  TemporalMode expected =
      interpolate_to_grid(uid_win, out.mode.t_start, out.mode.dt, out.mode.size());
  CHECK(mode_mismatch(out.mode, expected) < 1e-9);
}

TEST_CASE("sweep outputs are byte-identical across worker counts") {
  AcquisitionConfig cfg = small_config(1200);
  TraceProvider provider(cfg, true);
  const std::vector<double> fc_list = {101e6, cfg.f_c_hz};
  const std::vector<std::size_t> n_list = {1, 5};
  namespace fs = std::filesystem;
  const auto dir1 = fs::temp_directory_path() / "cvhd_sweep_w1";
  const auto dir2 = fs::temp_directory_path() / "cvhd_sweep_w2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  for (int workers : {1, 2}) {
    PipelineOptions options = PipelineOptions::from_config(cfg);
    options.workers = workers;
    SweepOutput sweep = run_sweep(provider, cfg, fc_list, n_list, options);
    CHECK(sweep.points.size() == 4);  // baseline + 3 degraded points
    for (const auto& p : sweep.points) CHECK(p.result.ok);
    emit_reports(sweep, cfg, fc_list, n_list, options,
                 (workers == 1 ? dir1 : dir2).string());
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir1)) {
    const auto other = dir2 / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));
    ++compared;
  }
  CHECK(compared >= 4);  // heatmap, results, manifest, modes

  const std::string heatmap = slurp(dir1 / "heatmap.csv");
  CHECK(heatmap.rfind("fc_hz,fs_sps,nyquist_ok,W00,fidelity,mismatch,converged_at\n", 0) == 0);
  std::size_t rows = 0;
  for (char c : heatmap)
    if (c == '\n') ++rows;
  CHECK(rows == 5);  // header + 2x2 grid
}

TEST_CASE("per-point failures are recorded without aborting the sweep") {
  AcquisitionConfig cfg = small_config(600);
  TraceProvider provider(cfg, true);
  PipelineOptions options = PipelineOptions::from_config(cfg);
  // Decimating by more than the trace length must fail for that point only.
  SweepOutput sweep =
      run_sweep(provider, cfg, {cfg.f_c_hz}, {1, provider.samples_per_trace() + 1}, options);
  REQUIRE(sweep.points.size() == 2);
  CHECK(sweep.points[0].result.ok);
  CHECK_FALSE(sweep.points[1].result.ok);
  CHECK_FALSE(sweep.points[1].result.error.empty());
}

TEST_CASE("calibration handles the degenerate gaussian family") {
  AcquisitionConfig cfg = small_config(1000);
  cfg.state.xi = 0.0;
  CalibrationReport report = calibrate_state(0.0, cfg);
  CHECK(report.degenerate_gaussian);
  CHECK(report.surrogate_evals == 0);
}

TEST_CASE("calibration rejects unreachable targets") {
  AcquisitionConfig cfg = small_config(800);
  CHECK_THROWS_AS(calibrate_state(-0.5, cfg), ConfigError);
}

TEST_CASE("calibrating to the pure single photon drives r to zero") {
  AcquisitionConfig cfg = small_config(6000);
  cfg.eta_hd = 1.0;
  cfg.snr_db = 600.0;
  cfg.state = {0.3, 1.0, 1.0, 10};
  CalibrationOptions opts;
  // At N=6000 the reconstructed-mode sampling noise bounds the achievable
  // negativity near -0.29; the limit-case content is that r lands at zero.
  opts.tolerance = 0.03;
  CalibrationReport report = calibrate_state(-1.0 / 3.14159265358979, cfg, opts);
  CHECK(report.model.r < 0.05);
  CHECK(std::abs(report.achieved_w00 + 1.0 / 3.14159265358979) <= 0.03);
}
