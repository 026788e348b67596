// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "thz/binary_io.hpp"
#include "thz/config.hpp"
#include "thz/dataset_io.hpp"
#include "thz/estimators.hpp"
#include "thz/format.hpp"
#include "thz/metrics.hpp"
#include "thz/nn/train.hpp"
#include "thz/observation.hpp"

#ifndef THZ_VERSION
#define THZ_VERSION "0.0.0"
#endif

namespace thz {

/// A complete experiment: base scenario, scale, pilots and training setup.
struct ExperimentConfig {
  ScenarioConfig scenario = experiment_preset();
  Profile profile = Profile::Desk;
  std::size_t samples = 2000;
  std::size_t hidden_units = 16;  // 0: use N
  std::vector<std::size_t> antenna_grid{16, 64};
  std::vector<double> pn_grid = default_pn_grid();
  PilotKind pilot_kind = PilotKind::Identity;
  std::vector<std::size_t> dnn_hidden;
  TrainConfig train;
  std::size_t gen_threads = 1;

  std::size_t hidden_for(std::size_t antennas) const {
    return hidden_units == 0 ? antennas : hidden_units;
  }
};

inline ExperimentConfig make_experiment(Profile profile) {
  ExperimentConfig cfg;
  cfg.profile = profile;
  const ProfileSettings s = profile_settings(profile);
  cfg.samples = s.samples;
  cfg.hidden_units = s.hidden_units;
  cfg.antenna_grid = s.antenna_grid;
  cfg.scenario = cfg.scenario.with_antennas(s.antenna_grid.front());
  cfg.pilot_kind = profile == Profile::Paper ? PilotKind::UnitaryDft : PilotKind::Identity;
  return cfg;
}

inline Profile parse_profile(const std::string& s) {
  if (s == "desk") return Profile::Desk;
  if (s == "paper") return Profile::Paper;
  throw ConfigError("unknown profile '" + s + "' (expected desk or paper)");
}

inline std::string to_string(Profile p) { return p == Profile::Paper ? "paper" : "desk"; }

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"scenario", to_json(c.scenario)},
          {"profile", to_string(c.profile)},
          {"samples", c.samples},
          {"hidden_units", c.hidden_units},
          {"antenna_grid", c.antenna_grid},
          {"pn_grid", c.pn_grid},
          {"pilot_kind", to_string(c.pilot_kind)},
          {"dnn_hidden", c.dnn_hidden},
          {"train",
           {{"learning_rate", c.train.learning_rate},
            {"batch_size", c.train.batch_size},
            {"beta1", c.train.beta1},
            {"beta2", c.train.beta2},
            {"epsilon", c.train.epsilon},
            {"max_epochs", c.train.max_epochs},
            {"patience", c.train.patience},
            {"val_fraction", c.train.val_fraction},
            {"seed", c.train.seed}}}};
}

inline std::string config_hash(const ExperimentConfig& c) {
  const std::string text = to_json(c).dump();
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x",
                io::crc32(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return buf;
}

inline const std::vector<std::string>& known_estimators() {
  static const std::vector<std::string> names{"ls", "mmse", "dnn", "lstm", "bilstm-gru"};
  return names;
}

inline std::vector<std::string> parse_estimators(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto& known = known_estimators();
    if (std::find(known.begin(), known.end(), item) == known.end())
      throw ConfigError("unknown estimator '" + item + "'");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError("no estimators selected");
  return out;
}

struct EvalRow {
  std::string estimator;
  std::size_t n_antennas = 0;
  std::size_t m_pilots = 0;
  double snr_db = 0.0;
  double pn_var_tx = 0.0;
  double pn_var_rx = 0.0;
  double nmse_db = 0.0;
  std::size_t trials = 0;

  friend bool operator==(const EvalRow&, const EvalRow&) = default;
};

struct CellFailure {
  std::string estimator;
  std::size_t n_antennas = 0;
  double snr_db = 0.0;
  double pn_var = 0.0;
  std::string message;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<CellFailure> failures;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string code_version = THZ_VERSION;

  /// Orders rows by (estimator, N, SNR, PN variances).
  void sort_rows() {
    std::stable_sort(rows.begin(), rows.end(), [](const EvalRow& a, const EvalRow& b) {
      return std::tie(a.estimator, a.n_antennas, a.snr_db, a.pn_var_tx, a.pn_var_rx) <
             std::tie(b.estimator, b.n_antennas, b.snr_db, b.pn_var_tx, b.pn_var_rx);
    });
  }

  const EvalRow* find(const std::string& est, std::size_t n, double snr, double pn_tx) const {
    for (const auto& r : rows)
      if (r.estimator == est && r.n_antennas == n && r.snr_db == snr && r.pn_var_tx == pn_tx)
        return &r;
    return nullptr;
  }
};

/// Trained learned estimator plus its history, kept for inspection.
struct TrainedModel {
  nn::ModelSpec spec;
  nn::TrainResult result;
};

inline nn::Arch arch_for(const std::string& name) { return nn::parse_arch(name); }

/// Estimates for every test sample of `ds` with the named estimator. Learned
/// estimators are trained on the training split first.
inline std::vector<CVector> estimate_test_split(const std::string& estimator, const Dataset& ds,
                                                const ExperimentConfig& cfg,
                                                TrainedModel* trained = nullptr) {
  const auto test = ds.test();
  std::vector<CVector> out;
  out.reserve(test.size());
  if (estimator == "ls") {
    const LsEstimator ls(ds.pilots);
    for (const auto& s : test) out.push_back(ls.estimate(s.received));
  } else if (estimator == "mmse") {
    const MmseStatistics st = fit_mmse(ds);
    for (const auto& s : test) out.push_back(mmse_estimate(s.received, st));
  } else {
    const std::size_t n = ds.manifest.scenario.num_antennas;
    const std::size_t m = ds.manifest.scenario.num_pilots;
    TrainedModel model;
    model.spec = nn::make_spec(arch_for(estimator), m, n, cfg.hidden_for(n), cfg.dnn_hidden);
    model.result = nn::train_on_dataset(model.spec, ds, cfg.train);
    for (const auto& s : test) out.push_back(nn::predict_channel(model.result.params, model.spec, s));
    if (trained) *trained = std::move(model);
  }
  return out;
}

/// One (N, SNR, PN) cell for several estimators. Failures are recorded and
/// do not stop the remaining estimators.
inline void evaluate_cell(const ExperimentConfig& cfg, std::size_t antennas, double snr_db,
                          double pn_tx, double pn_rx, const std::vector<std::string>& estimators,
                          EvalReport& report) {
  Dataset ds;
  try {
    const ScenarioConfig sc = cfg.scenario.with_antennas(antennas).with_pn(pn_tx, pn_rx);
    ds = generate_dataset(sc, cfg.samples, snr_db, cfg.pilot_kind, cfg.gen_threads);
  } catch (const Error& e) {
    for (const auto& est : estimators)
      report.failures.push_back({est, antennas, snr_db, pn_tx, e.what()});
    return;
  }
  std::vector<CVector> truth;
  for (const auto& s : ds.test()) truth.push_back(s.truth);
  for (const auto& est : estimators) {
    try {
      const auto estimates = estimate_test_split(est, ds, cfg);
      report.rows.push_back({est, antennas, ds.manifest.scenario.num_pilots, snr_db, pn_tx, pn_rx,
                             nmse_db(truth, estimates), truth.size()});
    } catch (const Error& e) {
      report.failures.push_back({est, antennas, snr_db, pn_tx, e.what()});
    }
  }
}

inline EvalReport new_report(const ExperimentConfig& cfg) {
  EvalReport r;
  r.config_hash = config_hash(cfg);
  r.seed = cfg.scenario.seed;
  return r;
}

/// NMSE vs SNR for every N of the antenna grid at the scenario's PN variances.
inline EvalReport run_snr_sweep(const ExperimentConfig& cfg, const std::vector<std::string>& estimators,
                                const std::vector<double>& snr_grid) {
  EvalReport report = new_report(cfg);
  for (std::size_t n : cfg.antenna_grid)
    for (double snr : snr_grid)
      evaluate_cell(cfg, n, snr, cfg.scenario.pn_var_tx, cfg.scenario.pn_var_rx, estimators, report);
  report.sort_rows();
  return report;
}

/// NMSE for every (N, PN variance, SNR); the same variance is used at Tx and Rx.
inline EvalReport run_pn_sweep(const ExperimentConfig& cfg, const std::vector<std::string>& estimators,
                               const std::vector<double>& pn_grid,
                               const std::vector<double>& snr_grid) {
  EvalReport report = new_report(cfg);
  for (std::size_t n : cfg.antenna_grid)
    for (double pn : pn_grid)
      for (double snr : snr_grid) evaluate_cell(cfg, n, snr, pn, pn, estimators, report);
  report.sort_rows();
  return report;
}

enum class ReportFormat { Csv, PrettyTable };

inline ReportFormat parse_report_format(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "pretty" || s == "pretty-table") return ReportFormat::PrettyTable;
  throw ConfigError("unknown report format '" + s + "' (expected csv or pretty-table)");
}

inline constexpr const char* kReportHeader =
    "estimator,n_antennas,m_pilots,snr_db,pn_var_tx,pn_var_rx,nmse_db,trials";

inline std::string report_csv(const EvalReport& report) {
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& r : report.rows) {
    out += r.estimator + ',' + std::to_string(r.n_antennas) + ',' + std::to_string(r.m_pilots) +
           ',' + format_double(r.snr_db) + ',' + format_double(r.pn_var_tx) + ',' +
           format_double(r.pn_var_rx) + ',' + format_double(r.nmse_db) + ',' +
           std::to_string(r.trials) + '\n';
  }
  return out;
}

inline std::string report_table(const EvalReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "estimator" << std::right << std::setw(6) << "N"
     << std::setw(6) << "M" << std::setw(9) << "SNR dB" << std::setw(12) << "PN tx"
     << std::setw(12) << "PN rx" << std::setw(11) << "NMSE dB" << std::setw(8) << "trials"
     << '\n';
  for (const auto& r : report.rows) {
    os << std::left << std::setw(12) << r.estimator << std::right << std::setw(6) << r.n_antennas
       << std::setw(6) << r.m_pilots << std::setw(9) << std::fixed << std::setprecision(1)
       << r.snr_db << std::setw(12) << std::scientific << std::setprecision(2) << r.pn_var_tx
       << std::setw(12) << r.pn_var_rx << std::setw(11) << std::fixed << std::setprecision(3)
       << r.nmse_db << std::setw(8) << r.trials << '\n';
    os.unsetf(std::ios::floatfield);
  }
  for (const auto& f : report.failures)
    os << "FAILED " << f.estimator << " N=" << f.n_antennas << " SNR=" << f.snr_db << ": "
       << f.message << '\n';
  return os.str();
}

/// Manifest of a report: config hash, seed, code version and failed cells.
inline std::string report_manifest(const EvalReport& report) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : report.failures)
    failures.push_back({{"estimator", f.estimator},
                        {"n_antennas", f.n_antennas},
                        {"snr_db", f.snr_db},
                        {"pn_var", f.pn_var},
                        {"message", f.message}});
  const nlohmann::json j = {{"config_hash", report.config_hash},
                            {"seed", report.seed},
                            {"code_version", report.code_version},
                            {"rows", report.rows.size()},
                            {"failures", failures}};
  return j.dump(2) + "\n";
}

/// Writes the report; for CSV a "<path>.manifest.json" sidecar is written too.
inline void emit_report(const EvalReport& report, const std::string& path, ReportFormat format) {
  if (report.rows.empty()) throw ConfigError("refusing to emit an empty report");
  const std::string body = format == ReportFormat::Csv ? report_csv(report) : report_table(report);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << body;
  if (!out) throw IoError("write to '" + path + "' failed");
  if (format == ReportFormat::Csv) {
    std::ofstream side(path + ".manifest.json", std::ios::binary | std::ios::trunc);
    if (!side) throw IoError("cannot write report manifest next to '" + path + "'");
    side << report_manifest(report);
  }
}

inline EvalReport parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader)
    throw FormatError("report CSV header must be: " + std::string(kReportHeader));
  EvalReport report;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw FormatError("report line " + std::to_string(lineno) + " needs 8 fields");
    try {
      report.rows.push_back({f[0], std::stoul(f[1]), std::stoul(f[2]), parse_double(f[3]),
                             parse_double(f[4]), parse_double(f[5]), parse_double(f[6]),
                             std::stoul(f[7])});
    } catch (const std::logic_error&) {
      throw FormatError("report line " + std::to_string(lineno) + " has a malformed count");
    }
  }
  return report;
}

inline EvalReport load_report_csv(const std::string& path) {
  const auto bytes = io::read_file(path);
  return parse_report_csv(std::string(bytes.begin(), bytes.end()));
}

}  // namespace thz
