// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cvhd/config.hpp"
#include "cvhd/errors.hpp"
#include "cvhd/io.hpp"
#include "cvhd/trace_synth.hpp"

using namespace cvhd;

namespace {
std::filesystem::path temp_path(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::trunc);
  out << content;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}
}  // namespace

TEST_CASE("fnv1a64 known vectors") {
  CHECK(io::fnv1a64("", 0) == 0xcbf29ce484222325ull);
  CHECK(io::fnv1a64("a", 1) == 0xaf63dc4c8601ec8cull);
  CHECK(io::fnv1a64("foobar", 6) == 0x85944171f73967e8ull);
}

TEST_CASE("config json round trip") {
  AcquisitionConfig cfg;
  cfg.n_traces = 1234;
  cfg.state.r = 0.31;
  cfg.seed = 99;
  const auto path = temp_path("cvhd_cfg.json");
  write_file(path, config_to_json(cfg));
  AcquisitionConfig loaded = load_config(path.string());
  CHECK(loaded.n_traces == 1234);
  CHECK(loaded.state.r == doctest::Approx(0.31));
  CHECK(loaded.seed == 99);
  CHECK(config_hash(loaded) == config_hash(cfg));
  CHECK(synthesis_hash(loaded) == synthesis_hash(cfg));
}

TEST_CASE("config rejects unknown keys and bad values") {
  const auto path = temp_path("cvhd_bad.json");
  write_file(path, "{\"gamma_hz\": 9.3e6, \"bogus\": 1}");
  CHECK_THROWS_AS(load_config(path.string()), ConfigError);
  write_file(path, "{\"eta_hd\": 1.5}");
  CHECK_THROWS_AS(load_config(path.string()), ConfigError);
  write_file(path, "{\"window_s\": [-1.0e-6, -1.25e-6]}");
  CHECK_THROWS_AS(load_config(path.string()), ConfigError);
  write_file(path, "not json");
  CHECK_THROWS_AS(load_config(path.string()), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/cvhd.json"), ConfigError);
}

TEST_CASE("config invariants") {
  AcquisitionConfig cfg;
  cfg.window_hi_s = cfg.window_lo_s + 50e-9;  // < 3/(pi Gamma)
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = AcquisitionConfig{};
  cfg.phase_source = "psychic";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = AcquisitionConfig{};
  cfg.state.xi = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("dataset file round trip is bit exact") {
  AcquisitionConfig cfg;
  cfg.f_s_sps = 1e9;
  cfg.side_region_s = 0.3e-6;
  cfg.n_traces = 20;
  const auto path = temp_path("cvhd_roundtrip.cvtr");

  io::DatasetHeader header;
  header.n_traces = cfg.n_traces;
  header.dt = cfg.dt();
  header.t_start = cfg.synth_t_start();
  header.samples_per_trace = cfg.synth_samples();
  header.config_hash = synthesis_hash(cfg);

  std::vector<HomodyneTrace> originals;
  {
    io::DatasetWriter writer(path.string(), header);
    synth_dataset(cfg, [&](HomodyneTrace&& t, const TruthRecord&) {
      writer.write(t);
      originals.push_back(std::move(t));
    });
  }
  io::DatasetReader reader(path.string());
  CHECK(reader.header().n_traces == 20);
  CHECK(reader.header().config_hash == synthesis_hash(cfg));
  HomodyneTrace t;
  std::size_t i = 0;
  while (reader.read_next(t)) {
    CHECK(t.samples == originals[i].samples);
    CHECK(t.trace_id == originals[i].trace_id);
    CHECK(t.true_phase == originals[i].true_phase);
    ++i;
  }
  CHECK(i == 20);
}

TEST_CASE("dataset writing is deterministic byte for byte") {
  AcquisitionConfig cfg;
  cfg.f_s_sps = 1e9;
  cfg.side_region_s = 0.3e-6;
  cfg.n_traces = 8;
  const auto a = temp_path("cvhd_det_a.cvtr");
  const auto b = temp_path("cvhd_det_b.cvtr");
  for (const auto& path : {a, b}) {
    io::DatasetHeader header;
    header.n_traces = cfg.n_traces;
    header.dt = cfg.dt();
    header.t_start = cfg.synth_t_start();
    header.samples_per_trace = cfg.synth_samples();
    header.config_hash = synthesis_hash(cfg);
    io::DatasetWriter writer(path.string(), header);
    synth_dataset(cfg, [&](HomodyneTrace&& t, const TruthRecord&) { writer.write(t); });
  }
  CHECK(read_file(a) == read_file(b));
}

TEST_CASE("dataset reader rejects foreign files") {
  const auto path = temp_path("cvhd_not_a_dataset.bin");
  write_file(path, "definitely not CVTR data");
  CHECK_THROWS_AS(io::DatasetReader(path.string()), ConfigError);
}

TEST_CASE("csv emitters are deterministic") {
  TemporalMode mode;
  mode.dt = 1e-9;
  mode.t_start = -1e-6;
  mode.samples = {0.25, 0.5, 0.25};
  const auto a = temp_path("cvhd_mode_a.csv");
  const auto b = temp_path("cvhd_mode_b.csv");
  io::write_mode_csv(a.string(), mode);
  io::write_mode_csv(b.string(), mode);
  const std::string content = read_file(a);
  CHECK(content == read_file(b));
  CHECK(content.rfind("t_seconds,u_value\n", 0) == 0);

  TomoSet set;
  set.eta_hd = 0.72;
  set.fc_hz = 301e6;
  set.fs_sps = 5e9;
  set.mode_hash = io::mode_hash(mode);
  set.samples = {{0.1, 0.2, 0}, {-0.3, 1.7, 1}};
  const auto samples_path = temp_path("cvhd_samples.csv");
  const auto sidecar_path = temp_path("cvhd_samples.meta.json");
  io::write_samples_csv(samples_path.string(), set);
  io::write_samples_sidecar(sidecar_path.string(), set);
  const std::string csv = read_file(samples_path);
  CHECK(csv.rfind("trace_id,theta,X\n", 0) == 0);
  CHECK(read_file(sidecar_path).find("mode_hash") != std::string::npos);
}
