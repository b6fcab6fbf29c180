// SPDX-License-Identifier: Apache-2.0
//
// cvhd: synthesize heralded homodyne datasets, degrade the detection chain
// digitally, and reconstruct temporal modes and quantum states.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "cvhd/errors.hpp"
#include "cvhd/io.hpp"
#include "cvhd/pipeline.hpp"
#include "cvhd/version.hpp"

namespace {

using namespace cvhd;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string mode_source;
  std::string efficiency_mode;
};

AcquisitionConfig resolve_config(const CommonArgs& args) {
  AcquisitionConfig cfg;
  if (!args.config_path.empty()) cfg = load_config(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (!args.efficiency_mode.empty()) cfg.efficiency_mode = args.efficiency_mode;
  cfg.validate();
  return cfg;
}

PipelineOptions resolve_options(const AcquisitionConfig& cfg, const CommonArgs& args) {
  PipelineOptions options = PipelineOptions::from_config(cfg);
  if (args.mode_source == "ideal")
    options.mode_source = ModeSource::kIdeal;
  else if (args.mode_source == "reconstructed" || args.mode_source.empty())
    options.mode_source = ModeSource::kReconstructed;
  else
    throw ConfigError("--mode-source must be 'reconstructed' or 'ideal'");
  return options;
}

const std::vector<double> kDefaultFcList = {11e6, 31e6, 51e6, 101e6, 151e6, 201e6, 301e6};
const std::vector<std::size_t> kDefaultNList = {1, 2, 9, 17, 21, 25, 33};

TraceProvider make_provider(const AcquisitionConfig& cfg, const std::string& dataset_path) {
  if (!dataset_path.empty()) return TraceProvider::from_file(dataset_path, cfg);
  return TraceProvider(cfg, true);
}

int cmd_synth(const CommonArgs& common, const std::string& out_path,
              const std::string& truth_path) {
  const AcquisitionConfig cfg = resolve_config(common);
  io::DatasetHeader header;
  header.n_traces = cfg.n_traces;
  header.dt = cfg.dt();
  header.t_start = cfg.synth_t_start();
  header.samples_per_trace = cfg.synth_samples();
  header.config_hash = synthesis_hash(cfg);
  io::DatasetWriter writer(out_path, header);
  std::vector<TruthRecord> truth;
  truth.reserve(cfg.n_traces);
  synth_dataset(cfg, [&](HomodyneTrace&& trace, const TruthRecord& record) {
    writer.write(trace);
    truth.push_back(record);
  });
  if (!truth_path.empty()) io::write_truth_csv(truth_path, truth);
  std::cout << "wrote " << cfg.n_traces << " traces (" << header.samples_per_trace
            << " samples each) to " << out_path << "\n";
  return 0;
}

int cmd_calibrate(const CommonArgs& common, double target, const std::string& out_path) {
  const AcquisitionConfig cfg = resolve_config(common);
  const CalibrationReport report = calibrate_state(target, cfg);
  nlohmann::json j;
  j["target_w00"] = report.target_w00;
  j["achieved_w00"] = report.achieved_w00;
  j["state"] = {{"r", report.model.r},
                {"xi", report.model.xi},
                {"eta_prep", report.model.eta_prep},
                {"fock_cutoff", report.model.fock_cutoff}};
  j["surrogate_evals"] = report.surrogate_evals;
  j["full_evals"] = report.full_evals;
  j["degenerate_gaussian"] = report.degenerate_gaussian;
  j["note"] = report.note;
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + out_path + " for writing");
    out << j.dump(2) << '\n';
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const CommonArgs& common, std::vector<double> fc_list,
              std::vector<std::size_t> n_list, const std::string& dataset_path,
              const std::string& out_dir) {
  const AcquisitionConfig cfg = resolve_config(common);
  const PipelineOptions options = resolve_options(cfg, common);
  if (fc_list.empty()) fc_list = kDefaultFcList;
  if (n_list.empty()) n_list = kDefaultNList;
  const TraceProvider provider = make_provider(cfg, dataset_path);
  const SweepOutput sweep = run_sweep(provider, cfg, fc_list, n_list, options);
  emit_reports(sweep, cfg, fc_list, n_list, options, out_dir);
  std::size_t failed = 0;
  for (const auto& p : sweep.points)
    if (!p.result.ok) ++failed;
  std::cout << "sweep finished: " << sweep.points.size() << " points, " << failed
            << " failed, " << sweep.wall_seconds << " s; reports in " << out_dir << "\n";
  if (failed > 0)
    for (const auto& p : sweep.points)
      if (!p.result.ok)
        std::cerr << "point fc=" << p.result.fc_hz << " fs=" << p.result.fs_sps
                  << " failed: " << p.result.error << "\n";
  return 0;
}

int cmd_tomo(const CommonArgs& common, double fc_hz, std::size_t decim,
             const std::string& dataset_path, const std::string& out_dir) {
  const AcquisitionConfig cfg = resolve_config(common);
  const PipelineOptions options = resolve_options(cfg, common);
  const TraceProvider provider = make_provider(cfg, dataset_path);
  const std::vector<double> phases = resolve_phases(provider, cfg, options.phase_source);
  const PointSpec point{fc_hz > 0 ? fc_hz : cfg.f_c_hz, decim};
  const PointOutput out = run_point(provider, cfg, point, phases, options, nullptr);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create " + out_dir);
  const auto path = [&](const std::string& n) { return (fs::path(out_dir) / n).string(); };
  io::write_mode_csv(path("mode.csv"), out.mode);
  io::write_density_csv(path("rho.csv"), out.rho);
  std::vector<double> axis(201);
  for (std::size_t i = 0; i < axis.size(); ++i) axis[i] = -5.0 + 0.05 * static_cast<double>(i);
  io::write_wigner_csv(path("wigner.csv"), wigner(out.rho, axis, axis));
  std::cout << "W(0,0) = " << out.result.w00 << " (fc=" << point.fc_hz
            << " Hz, fs=" << out.result.fs_sps << " sps, nyquist_ok=" << out.result.nyquist_ok
            << ", converged_at=" << out.result.maxlik_converged_at << ")\n"
            << "outputs in " << out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& results_path, const std::string& out_dir) {
  std::ifstream in(results_path);
  if (!in) throw ConfigError("cannot open " + results_path);
  nlohmann::json results;
  try {
    in >> results;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("results.json parse error: ") + e.what());
  }
  if (!results.is_array()) throw ConfigError("results.json: expected an array");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create " + out_dir);
  std::ofstream out((fs::path(out_dir) / "heatmap.csv").string(), std::ios::trunc);
  out << "fc_hz,fs_sps,nyquist_ok,W00,fidelity,mismatch,converged_at\n";
  for (const auto& r : results) {
    if (!r.value("ok", true)) continue;
    out << io::format_double(r.at("fc_hz").get<double>()) << ','
        << io::format_double(r.at("fs_sps").get<double>()) << ','
        << (r.at("nyquist_ok").get<bool>() ? 1 : 0) << ','
        << io::format_double(r.at("W00").get<double>()) << ','
        << io::format_double(r.at("fidelity_vs_baseline").get<double>()) << ','
        << io::format_double(r.at("mode_mismatch").get<double>()) << ','
        << r.at("maxlik_converged_at").get<int>() << '\n';
  }
  std::cout << "re-emitted heatmap.csv for " << results.size() << " points into " << out_dir
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heralded CW homodyne synthesis, detection-chain degradation and "
               "quantum-state reconstruction"};
  app.set_version_flag("--version", cvhd::kVersion);
  app.require_subcommand(1);

  CommonArgs common;
  std::string out_path;
  std::string truth_path;
  std::string dataset_path;
  std::vector<double> fc_list;
  std::vector<std::size_t> n_list;
  double target = -0.084;
  double fc_point = 0.0;
  std::size_t decim_point = 1;
  std::string results_path;

  const auto add_common = [&](CLI::App* cmd, bool with_modes) {
    cmd->add_option("--config", common.config_path, "JSON configuration file");
    cmd->add_option("--seed", common.seed, "Override the configured seed");
    if (with_modes) {
      cmd->add_option("--mode-source", common.mode_source,
                      "Projection mode: reconstructed | ideal");
      cmd->add_option("--efficiency-mode", common.efficiency_mode,
                      "Detection-efficiency handling: povm | rescale");
    }
  };

  auto* synth = app.add_subcommand("synth", "Generate a trace dataset file");
  add_common(synth, false);
  synth->add_option("--out", out_path, "Output CVTR dataset path")->required();
  synth->add_option("--truth", truth_path, "Also write the truth record CSV");

  auto* calibrate = app.add_subcommand(
      "calibrate", "Calibrate the state model against a target W(0,0)");
  add_common(calibrate, false);
  calibrate->add_option("--target", target, "Target W(0,0) (default -0.084)");
  calibrate->add_option("--out", out_path, "Write the calibration report JSON here");

  auto* sweep = app.add_subcommand("sweep", "Run the (f_c, f_s) degradation sweep");
  add_common(sweep, true);
  sweep->add_option("--fc-list", fc_list, "Cutoff frequencies in Hz")->delimiter(',');
  sweep->add_option("--n-list", n_list, "Decimation factors")->delimiter(',');
  sweep->add_option("--dataset", dataset_path, "Use a CVTR dataset file instead of synthesis");
  sweep->add_option("--out", out_path, "Report directory")->required();

  auto* tomo = app.add_subcommand("tomo", "Reconstruct a single (f_c, n) point");
  add_common(tomo, true);
  tomo->add_option("--fc", fc_point, "Cutoff frequency in Hz (default: native)");
  tomo->add_option("--n", decim_point, "Decimation factor (default 1)");
  tomo->add_option("--dataset", dataset_path, "Use a CVTR dataset file instead of synthesis");
  tomo->add_option("--out", out_path, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Re-emit plot-ready CSVs from results.json");
  report->add_option("--results", results_path, "results.json from a sweep")->required();
  report->add_option("--out", out_path, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(common, out_path, truth_path);
    if (calibrate->parsed()) return cmd_calibrate(common, target, out_path);
    if (sweep->parsed()) return cmd_sweep(common, fc_list, n_list, dataset_path, out_path);
    if (tomo->parsed()) return cmd_tomo(common, fc_point, decim_point, dataset_path, out_path);
    if (report->parsed()) return cmd_report(results_path, out_path);
  } catch (const cvhd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const cvhd::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
