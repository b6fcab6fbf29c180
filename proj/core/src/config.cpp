// SPDX-License-Identifier: Apache-2.0
#include "cvhd/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "cvhd/errors.hpp"
#include "cvhd/io.hpp"

namespace cvhd {

using nlohmann::json;

void HeraldedStateModel::validate() const {
  if (!(xi >= 0.0 && xi <= 1.0)) throw ConfigError("state: xi must be in [0, 1]");
  if (!(eta_prep > 0.0 && eta_prep <= 1.0))
    throw ConfigError("state: eta_prep must be in (0, 1]");
  if (fock_cutoff < 4) throw ConfigError("state: fock_cutoff must be >= 4");
  if (!std::isfinite(r) || std::abs(r) > 5.0) throw ConfigError("state: r out of range");
}

std::size_t AcquisitionConfig::synth_samples() const {
  return static_cast<std::size_t>(std::llround((synth_t_end() - synth_t_start()) * f_s_sps));
}

double AcquisitionConfig::electronic_variance() const {
  return 0.5 * std::pow(10.0, -snr_db / 10.0);
}

void AcquisitionConfig::validate() const {
  if (gamma_hz <= 0.0) throw ConfigError("config: gamma_hz must be positive");
  if (f_c_hz <= 0.0) throw ConfigError("config: f_c_hz must be positive");
  if (f_s_sps <= 0.0) throw ConfigError("config: f_s_sps must be positive");
  if (n_traces == 0) throw ConfigError("config: n_traces must be positive");
  if (!(eta_hd > 0.0 && eta_hd <= 1.0)) throw ConfigError("config: eta_hd must be in (0, 1]");
  if (window_hi_s <= window_lo_s) throw ConfigError("config: empty analysis window");
  const double window_len = window_hi_s - window_lo_s;
  if (window_len < 3.0 / (std::numbers::pi * gamma_hz))
    throw ConfigError("config: window length must be >= 3/(pi*Gamma)");
  if (window_lo_s < synth_t_start() || window_hi_s > synth_t_end())
    throw ConfigError("config: window not inside the synthesized trace span");
  if (full_span && trace_span_s < window_hi_s - window_lo_s + 2.0 * side_region_s)
    throw ConfigError("config: trace_span_s too short for the window and side regions");
  if (side_region_s <= 0.0) throw ConfigError("config: side_region_s must be positive");
  if (scan.trigger_period_s <= 0.0) throw ConfigError("config: trigger period must be positive");
  if (phase_source != "truth" && phase_source != "estimated")
    throw ConfigError("config: phase_source must be 'truth' or 'estimated'");
  if (efficiency_mode != "povm" && efficiency_mode != "rescale")
    throw ConfigError("config: efficiency_mode must be 'povm' or 'rescale'");
  if (maxlik_iters < 1) throw ConfigError("config: maxlik_iters must be >= 1");
  if (workers < 0) throw ConfigError("config: workers must be >= 0");
  state.validate();
}

namespace {

const std::set<std::string> kTopKeys = {
    "gamma_hz",     "fc_hz",         "fs_sps",          "n_traces",   "trace_span_s",
    "side_region_s", "full_span",    "window_s",        "t0_s",       "snr_db",
    "eta_hd",       "scan",          "state",           "seed",       "phase_source",
    "efficiency_mode", "maxlik_iters", "workers"};
const std::set<std::string> kScanKeys = {"rate_rad_per_s", "offset_rad", "trigger_period_s"};
const std::set<std::string> kStateKeys = {"r", "xi", "eta_prep", "fock_cutoff"};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(std::string("config: unknown key '") + it.key() + "' in " + where);
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

AcquisitionConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: parse error in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(j, kTopKeys, "top level");

  AcquisitionConfig cfg;
  try {
    get_if(j, "gamma_hz", cfg.gamma_hz);
    get_if(j, "fc_hz", cfg.f_c_hz);
    get_if(j, "fs_sps", cfg.f_s_sps);
    get_if(j, "n_traces", cfg.n_traces);
    get_if(j, "trace_span_s", cfg.trace_span_s);
    get_if(j, "side_region_s", cfg.side_region_s);
    get_if(j, "full_span", cfg.full_span);
    if (j.contains("window_s")) {
      const auto& w = j.at("window_s");
      if (!w.is_array() || w.size() != 2)
        throw ConfigError("config: window_s must be [lo, hi]");
      cfg.window_lo_s = w[0].get<double>();
      cfg.window_hi_s = w[1].get<double>();
    }
    get_if(j, "t0_s", cfg.t0_s);
    get_if(j, "snr_db", cfg.snr_db);
    get_if(j, "eta_hd", cfg.eta_hd);
    if (j.contains("scan")) {
      const auto& s = j.at("scan");
      reject_unknown(s, kScanKeys, "scan");
      get_if(s, "rate_rad_per_s", cfg.scan.rate_rad_per_s);
      get_if(s, "offset_rad", cfg.scan.offset_rad);
      get_if(s, "trigger_period_s", cfg.scan.trigger_period_s);
    }
    if (j.contains("state")) {
      const auto& s = j.at("state");
      reject_unknown(s, kStateKeys, "state");
      get_if(s, "r", cfg.state.r);
      get_if(s, "xi", cfg.state.xi);
      get_if(s, "eta_prep", cfg.state.eta_prep);
      get_if(s, "fock_cutoff", cfg.state.fock_cutoff);
    }
    get_if(j, "seed", cfg.seed);
    get_if(j, "phase_source", cfg.phase_source);
    get_if(j, "efficiency_mode", cfg.efficiency_mode);
    get_if(j, "maxlik_iters", cfg.maxlik_iters);
    get_if(j, "workers", cfg.workers);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string config_to_json(const AcquisitionConfig& cfg) {
  json j;
  j["gamma_hz"] = cfg.gamma_hz;
  j["fc_hz"] = cfg.f_c_hz;
  j["fs_sps"] = cfg.f_s_sps;
  j["n_traces"] = cfg.n_traces;
  j["trace_span_s"] = cfg.trace_span_s;
  j["side_region_s"] = cfg.side_region_s;
  j["full_span"] = cfg.full_span;
  j["window_s"] = {cfg.window_lo_s, cfg.window_hi_s};
  j["t0_s"] = cfg.t0_s;
  j["snr_db"] = cfg.snr_db;
  j["eta_hd"] = cfg.eta_hd;
  j["scan"] = {{"rate_rad_per_s", cfg.scan.rate_rad_per_s},
               {"offset_rad", cfg.scan.offset_rad},
               {"trigger_period_s", cfg.scan.trigger_period_s}};
  j["state"] = {{"r", cfg.state.r},
                {"xi", cfg.state.xi},
                {"eta_prep", cfg.state.eta_prep},
                {"fock_cutoff", cfg.state.fock_cutoff}};
  j["seed"] = cfg.seed;
  j["phase_source"] = cfg.phase_source;
  j["efficiency_mode"] = cfg.efficiency_mode;
  j["maxlik_iters"] = cfg.maxlik_iters;
  j["workers"] = cfg.workers;
  return j.dump(2);
}

std::uint64_t config_hash(const AcquisitionConfig& cfg) {
  const std::string canon = config_to_json(cfg);
  return io::fnv1a64(canon.data(), canon.size());
}

std::uint64_t synthesis_hash(const AcquisitionConfig& cfg) {
  json j;
  j["gamma_hz"] = cfg.gamma_hz;
  j["fc_hz"] = cfg.f_c_hz;
  j["fs_sps"] = cfg.f_s_sps;
  j["n_traces"] = cfg.n_traces;
  j["trace_span_s"] = cfg.trace_span_s;
  j["side_region_s"] = cfg.side_region_s;
  j["full_span"] = cfg.full_span;
  j["window_s"] = {cfg.window_lo_s, cfg.window_hi_s};
  j["t0_s"] = cfg.t0_s;
  j["snr_db"] = cfg.snr_db;
  j["eta_hd"] = cfg.eta_hd;
  j["scan"] = {{"rate_rad_per_s", cfg.scan.rate_rad_per_s},
               {"offset_rad", cfg.scan.offset_rad},
               {"trigger_period_s", cfg.scan.trigger_period_s}};
  j["state"] = {{"r", cfg.state.r},
                {"xi", cfg.state.xi},
                {"eta_prep", cfg.state.eta_prep},
                {"fock_cutoff", cfg.state.fock_cutoff}};
  j["seed"] = cfg.seed;
  const std::string canon = j.dump();
  return io::fnv1a64(canon.data(), canon.size());
}

}  // namespace cvhd
