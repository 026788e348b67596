// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>

#include "thz/binary_io.hpp"
#include "thz/format.hpp"
#include "thz/observation.hpp"

namespace thz {

inline constexpr std::string_view kDatasetMagic = "THZD";

inline nlohmann::json to_json(const ScenarioConfig& c) {
  return {{"num_antennas", c.num_antennas},   {"num_pilots", c.num_pilots},
          {"total_paths", c.total_paths},     {"gamma", c.gamma},
          {"carrier_freq", c.carrier_freq},   {"light_speed", c.light_speed},
          {"antenna_spacing", c.antenna_spacing}, {"distance_min", c.distance_min},
          {"distance_max", c.distance_max},   {"pn_var_tx", c.pn_var_tx},
          {"pn_var_rx", c.pn_var_rx},         {"snr_grid", c.snr_grid},
          {"seed", c.seed}};
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  c.num_antennas = j.at("num_antennas").get<std::size_t>();
  c.num_pilots = j.at("num_pilots").get<std::size_t>();
  c.total_paths = j.at("total_paths").get<std::size_t>();
  c.gamma = j.at("gamma").get<double>();
  c.carrier_freq = j.at("carrier_freq").get<double>();
  c.light_speed = j.at("light_speed").get<double>();
  c.antenna_spacing = j.at("antenna_spacing").get<double>();
  c.distance_min = j.at("distance_min").get<double>();
  c.distance_max = j.at("distance_max").get<double>();
  c.pn_var_tx = j.at("pn_var_tx").get<double>();
  c.pn_var_rx = j.at("pn_var_rx").get<double>();
  c.snr_grid = j.at("snr_grid").get<std::vector<double>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

inline nlohmann::json to_json(const DatasetManifest& m) {
  return {{"scenario", to_json(m.scenario)},
          {"sample_count", m.sample_count},
          {"snr_db", m.snr_db},
          {"pilot_kind", to_string(m.pilot_kind)},
          {"train_fraction", m.train_fraction},
          {"far_paths", m.far_paths},
          {"near_paths", m.near_paths},
          {"gamma_rounded", m.gamma_rounded},
          {"distance_override", m.distance_override},
          {"near_distance_lo", m.near_distance_lo},
          {"near_distance_hi", m.near_distance_hi},
          {"format_version", m.format_version}};
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest m;
  m.scenario = scenario_from_json(j.at("scenario"));
  m.sample_count = j.at("sample_count").get<std::size_t>();
  m.snr_db = j.at("snr_db").get<double>();
  m.pilot_kind = parse_pilot_kind(j.at("pilot_kind").get<std::string>());
  m.train_fraction = j.at("train_fraction").get<double>();
  m.far_paths = j.at("far_paths").get<std::size_t>();
  m.near_paths = j.at("near_paths").get<std::size_t>();
  m.gamma_rounded = j.at("gamma_rounded").get<bool>();
  m.distance_override = j.at("distance_override").get<bool>();
  m.near_distance_lo = j.at("near_distance_lo").get<double>();
  m.near_distance_hi = j.at("near_distance_hi").get<double>();
  m.format_version = j.at("format_version").get<std::uint16_t>();
  return m;
}

/// Canonical manifest text: sorted keys, no whitespace.
inline std::string canonical_manifest(const DatasetManifest& m) { return to_json(m).dump(); }

/// Layout (little-endian): "THZD", u16 version, u64-length-prefixed manifest
/// JSON, u64 S, u64 N, u64 M, then per sample y as 2M f64 (re, im
/// interleaved) and H as 2N f64, then CRC-32 of all preceding bytes.
inline std::vector<std::uint8_t> encode_dataset(const Dataset& ds) {
  io::ByteWriter w;
  w.bytes(kDatasetMagic.data(), kDatasetMagic.size());
  w.uint<std::uint16_t>(kDatasetFormatVersion);
  w.string(canonical_manifest(ds.manifest));
  const std::size_t n = ds.manifest.scenario.num_antennas;
  const std::size_t m = ds.manifest.scenario.num_pilots;
  w.uint<std::uint64_t>(ds.samples.size());
  w.uint<std::uint64_t>(n);
  w.uint<std::uint64_t>(m);
  for (const auto& s : ds.samples) {
    if (static_cast<std::size_t>(s.received.size()) != m ||
        static_cast<std::size_t>(s.truth.size()) != n)
      throw DimensionError("sample dimensions disagree with manifest");
    for (const cd& v : s.received) { w.f64(v.real()); w.f64(v.imag()); }
    for (const cd& v : s.truth) { w.f64(v.real()); w.f64(v.imag()); }
  }
  w.seal();
  return w.buffer();
}

inline Dataset decode_dataset(const std::vector<std::uint8_t>& bytes) {
  io::ByteReader r = io::open_sealed(bytes, kDatasetMagic);
  const auto version = r.uint<std::uint16_t>();
  if (version != kDatasetFormatVersion)
    throw FormatError("unsupported dataset version " + std::to_string(version));
  Dataset ds;
  try {
    ds.manifest = manifest_from_json(nlohmann::json::parse(r.string()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed dataset manifest: ") + e.what());
  }
  const auto s = r.uint<std::uint64_t>();
  const auto n = r.uint<std::uint64_t>();
  const auto m = r.uint<std::uint64_t>();
  if (s != ds.manifest.sample_count || n != ds.manifest.scenario.num_antennas ||
      m != ds.manifest.scenario.num_pilots)
    throw FormatError("dataset header disagrees with its manifest");
  if (r.remaining() / 16 < s * (n + m) || r.remaining() != s * (n + m) * 16)
    throw FormatError("dataset payload size does not match header");
  ds.samples.resize(s);
  const double snr = ds.manifest.snr_db;
  for (auto& sample : ds.samples) {
    sample.received.resize(static_cast<Eigen::Index>(m));
    sample.truth.resize(static_cast<Eigen::Index>(n));
    for (auto& v : sample.received) { const double re = r.f64(); v = cd(re, r.f64()); }
    for (auto& v : sample.truth) { const double re = r.f64(); v = cd(re, r.f64()); }
    sample.features = preprocess(sample.received);
    sample.snr_db = snr;
    sample.pn_var_tx = ds.manifest.scenario.pn_var_tx;
    sample.pn_var_rx = ds.manifest.scenario.pn_var_rx;
  }
  ds.split_index = train_split_index(s, ds.manifest.train_fraction);
  ds.pilots = dataset_pilots(ds.manifest);
  return ds;
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
  io::write_file(path, encode_dataset(ds));
}

inline Dataset load_dataset(const std::string& path) { return decode_dataset(io::read_file(path)); }

/// One row per sample: re_y_1..re_y_M, im_y_1..im_y_M, re_h_1..re_h_N, im_h_1..im_h_N.
inline void export_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const std::size_t n = ds.manifest.scenario.num_antennas;
  const std::size_t m = ds.manifest.scenario.num_pilots;
  std::string header;
  auto cols = [&](const char* prefix, std::size_t count) {
    for (std::size_t i = 1; i <= count; ++i) {
      if (!header.empty()) header += ',';
      header += prefix + std::to_string(i);
    }
  };
  cols("re_y_", m);
  cols("im_y_", m);
  cols("re_h_", n);
  cols("im_h_", n);
  out << header << '\n';
  for (const auto& s : ds.samples) {
    std::string row;
    auto put = [&](double v) {
      if (!row.empty()) row += ',';
      row += format_double(v);
    };
    for (const cd& v : s.received) put(v.real());
    for (const cd& v : s.received) put(v.imag());
    for (const cd& v : s.truth) put(v.real());
    for (const cd& v : s.truth) put(v.imag());
    out << row << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace thz
