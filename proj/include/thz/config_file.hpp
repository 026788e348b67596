// SPDX-License-Identifier: Apache-2.0
#pragma once

// Key-value configuration files:
//
//   # comment
//   num_antennas = 64
//   snr_grid = 0, 5, 10, 15, 20
//
// Keys mirror ScenarioConfig, TrainConfig and ExperimentConfig fields. Keys
// are applied on top of the selected profile. Setting num_antennas without
// num_pilots ties M to N; setting carrier_freq without antenna_spacing keeps
// half-wavelength spacing.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "thz/experiment.hpp"
#include "thz/format.hpp"

namespace thz {

using KeyValues = std::map<std::string, std::string>;

namespace detail {
inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const FormatError&) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
  }
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("config key '" + key + "': '" + v + "' is not a non-negative integer");
  return out;
}
}  // namespace detail

inline KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = detail::trim(line.substr(eq + 1));
  }
  return kv;
}

inline void apply_key_values(ExperimentConfig& cfg, const KeyValues& kv) {
  using detail::to_double;
  using detail::to_uint;
  ScenarioConfig& sc = cfg.scenario;
  TrainConfig& tc = cfg.train;
  for (const auto& [key, value] : kv) {
    auto sizes = [&] {
      std::vector<std::size_t> out;
      for (const auto& s : detail::split_list(value)) out.push_back(to_uint(key, s));
      return out;
    };
    auto doubles = [&] {
      std::vector<double> out;
      for (const auto& s : detail::split_list(value)) out.push_back(to_double(key, s));
      return out;
    };
    if (key == "num_antennas") sc.num_antennas = to_uint(key, value);
    else if (key == "num_pilots") sc.num_pilots = to_uint(key, value);
    else if (key == "total_paths") sc.total_paths = to_uint(key, value);
    else if (key == "gamma") sc.gamma = to_double(key, value);
    else if (key == "carrier_freq") sc.carrier_freq = to_double(key, value);
    else if (key == "light_speed") sc.light_speed = to_double(key, value);
    else if (key == "antenna_spacing") sc.antenna_spacing = to_double(key, value);
    else if (key == "distance_min") sc.distance_min = to_double(key, value);
    else if (key == "distance_max") sc.distance_max = to_double(key, value);
    else if (key == "pn_var_tx") sc.pn_var_tx = to_double(key, value);
    else if (key == "pn_var_rx") sc.pn_var_rx = to_double(key, value);
    else if (key == "snr_grid") sc.snr_grid = doubles();
    else if (key == "seed") sc.seed = to_uint(key, value);
    else if (key == "samples") cfg.samples = to_uint(key, value);
    else if (key == "hidden_units") cfg.hidden_units = to_uint(key, value);
    else if (key == "antenna_grid") cfg.antenna_grid = sizes();
    else if (key == "pn_grid") cfg.pn_grid = doubles();
    else if (key == "pilot_kind") cfg.pilot_kind = parse_pilot_kind(value);
    else if (key == "dnn_hidden") cfg.dnn_hidden = sizes();
    else if (key == "gen_threads") cfg.gen_threads = to_uint(key, value);
    else if (key == "learning_rate") tc.learning_rate = to_double(key, value);
    else if (key == "batch_size") tc.batch_size = to_uint(key, value);
    else if (key == "beta1") tc.beta1 = to_double(key, value);
    else if (key == "beta2") tc.beta2 = to_double(key, value);
    else if (key == "epsilon") tc.epsilon = to_double(key, value);
    else if (key == "max_epochs") tc.max_epochs = to_uint(key, value);
    else if (key == "patience") tc.patience = to_uint(key, value);
    else if (key == "val_fraction") tc.val_fraction = to_double(key, value);
    else if (key == "train_threads") tc.threads = to_uint(key, value);
    else if (key == "train_seed") tc.seed = to_uint(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  if (kv.count("num_antennas") && !kv.count("num_pilots")) sc.num_pilots = sc.num_antennas;
  if (kv.count("carrier_freq") && !kv.count("antenna_spacing"))
    sc.antenna_spacing = sc.light_speed / sc.carrier_freq / 2.0;
  if (kv.count("num_antennas") && !kv.count("antenna_grid")) cfg.antenna_grid = {sc.num_antennas};
}

inline ExperimentConfig load_experiment_config(const std::string& path, Profile profile) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg = make_experiment(profile);
  apply_key_values(cfg, parse_key_values(ss.str()));
  return cfg;
}

}  // namespace thz
