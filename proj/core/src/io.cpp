// SPDX-License-Identifier: Apache-2.0
#include "cvhd/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstring>

#include "cvhd/errors.hpp"

namespace cvhd::io {

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t mode_hash(const TemporalMode& mode) {
  std::uint64_t h = fnv1a64(mode.samples.data(), mode.samples.size() * sizeof(double));
  h ^= fnv1a64(&mode.dt, sizeof(double));
  h ^= fnv1a64(&mode.t_start, sizeof(double)) << 1;
  return h;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {
constexpr char kMagic[4] = {'C', 'V', 'T', 'R'};

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("io: cannot open " + path + " for writing");
  return out;
}
}  // namespace

DatasetWriter::DatasetWriter(const std::string& path, const DatasetHeader& header)
    : out_(open_out(path)), header_(header) {
  out_.write(kMagic, 4);
  write_raw(out_, header_.version);
  write_raw(out_, header_.n_traces);
  write_raw(out_, header_.dt);
  write_raw(out_, header_.t_start);
  write_raw(out_, header_.samples_per_trace);
  write_raw(out_, header_.config_hash);
}

void DatasetWriter::write(const HomodyneTrace& trace) {
  if (trace.size() != header_.samples_per_trace)
    throw ConfigError("DatasetWriter: trace length differs from the header");
  write_raw(out_, trace.trace_id);
  write_raw(out_, trace.true_phase);
  out_.write(reinterpret_cast<const char*>(trace.samples.data()),
             static_cast<std::streamsize>(trace.size() * sizeof(double)));
  ++written_;
}

DatasetWriter::~DatasetWriter() { out_.flush(); }

DatasetReader::DatasetReader(const std::string& path) : in_(path, std::ios::binary) {
  if (!in_) throw ConfigError("io: cannot open " + path);
  char magic[4];
  in_.read(magic, 4);
  if (!in_ || std::memcmp(magic, kMagic, 4) != 0)
    throw ConfigError("io: " + path + " is not a CVTR dataset");
  read_raw(in_, header_.version);
  read_raw(in_, header_.n_traces);
  read_raw(in_, header_.dt);
  read_raw(in_, header_.t_start);
  read_raw(in_, header_.samples_per_trace);
  read_raw(in_, header_.config_hash);
  if (!in_ || header_.version != 1)
    throw ConfigError("io: unsupported CVTR version in " + path);
}

bool DatasetReader::read_next(HomodyneTrace& trace) {
  if (read_ >= header_.n_traces) return false;
  trace.dt = header_.dt;
  trace.t_start = header_.t_start;
  read_raw(in_, trace.trace_id);
  read_raw(in_, trace.true_phase);
  trace.samples.resize(header_.samples_per_trace);
  in_.read(reinterpret_cast<char*>(trace.samples.data()),
           static_cast<std::streamsize>(trace.samples.size() * sizeof(double)));
  if (!in_) throw ConfigError("io: truncated CVTR dataset");
  ++read_;
  return true;
}

void write_truth_csv(const std::string& path, const std::vector<TruthRecord>& records) {
  auto out = open_out(path);
  out << "trace_id,theta,X_true\n";
  for (const auto& r : records)
    out << r.trace_id << ',' << format_double(r.theta) << ',' << format_double(r.x_true)
        << '\n';
}

void write_mode_csv(const std::string& path, const TemporalMode& mode) {
  auto out = open_out(path);
  out << "t_seconds,u_value\n";
  for (std::size_t k = 0; k < mode.size(); ++k)
    out << format_double(mode.time_at(k)) << ',' << format_double(mode.samples[k]) << '\n';
}

void write_samples_csv(const std::string& path, const TomoSet& set) {
  auto out = open_out(path);
  out << "trace_id,theta,X\n";
  for (const auto& s : set.samples)
    out << s.trace_id << ',' << format_double(s.theta) << ',' << format_double(s.x) << '\n';
}

void write_samples_sidecar(const std::string& path, const TomoSet& set) {
  nlohmann::json j;
  j["eta_hd"] = set.eta_hd;
  j["fc_hz"] = set.fc_hz;
  j["fs_sps"] = set.fs_sps;
  j["mode_hash"] = set.mode_hash;
  j["n_samples"] = set.samples.size();
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_density_csv(const std::string& path, const DensityMatrix& rho) {
  auto out = open_out(path);
  out << "row,col,re,im\n";
  for (int m = 0; m < rho.dim(); ++m)
    for (int n = 0; n < rho.dim(); ++n)
      out << m << ',' << n << ',' << format_double(rho.m(m, n).real()) << ','
          << format_double(rho.m(m, n).imag()) << '\n';
}

void write_wigner_csv(const std::string& path, const WignerGrid& grid) {
  auto out = open_out(path);
  out << "x,p,W\n";
  for (std::size_t i = 0; i < grid.x_axis.size(); ++i)
    for (std::size_t j = 0; j < grid.p_axis.size(); ++j)
      out << format_double(grid.x_axis[i]) << ',' << format_double(grid.p_axis[j]) << ','
          << format_double(grid.values(static_cast<Eigen::Index>(i),
                                       static_cast<Eigen::Index>(j)))
          << '\n';
}

}  // namespace cvhd::io
