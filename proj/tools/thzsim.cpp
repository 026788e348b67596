// SPDX-License-Identifier: Apache-2.0
//
// thzsim: dataset generation, training, evaluation and sweeps.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "thz/thz.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string profile = "desk";
  std::string estimators = "ls,mmse,dnn,lstm,bilstm-gru";
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_estimators) {
  cmd->add_option("--config", o.config, "key = value configuration file");
  cmd->add_option("--seed", o.seed, "master seed (overrides the config)");
  cmd->add_option("--out", o.out, "output path");
  cmd->add_option("--profile", o.profile, "desk | paper")->check(CLI::IsMember({"desk", "paper"}));
  if (with_estimators)
    cmd->add_option("--estimators", o.estimators, "comma list of ls,mmse,dnn,lstm,bilstm-gru");
}

thz::ExperimentConfig resolve(const CommonOptions& o) {
  const thz::Profile profile = thz::parse_profile(o.profile);
  thz::ExperimentConfig cfg =
      o.config.empty() ? thz::make_experiment(profile) : thz::load_experiment_config(o.config, profile);
  if (o.seed) {
    cfg.scenario.seed = *o.seed;
    cfg.train.seed = *o.seed;
  }
  return cfg;
}

void require_out(const CommonOptions& o) {
  if (o.out.empty()) throw thz::ConfigError("--out is required");
}

void write_report(const thz::EvalReport& report, const std::string& out, const std::string& format) {
  const auto fmt = thz::parse_report_format(format);
  if (out.empty() || out == "-") {
    if (report.rows.empty()) throw thz::ConfigError("refusing to emit an empty report");
    std::cout << (fmt == thz::ReportFormat::Csv ? thz::report_csv(report) : thz::report_table(report));
  } else {
    thz::emit_report(report, out, fmt);
  }
}

std::string quote(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') q += '\\';
    q += (c == '\n') ? ' ' : c;
  }
  return q + "\"";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"THz hybrid-field channel simulation and estimation"};
  app.require_subcommand(1);

  CommonOptions gen_o, train_o, eval_o, snr_o, pn_o;
  std::optional<double> gen_snr;
  std::optional<std::size_t> gen_n, gen_samples;
  std::string gen_pilots, gen_csv;
  auto* gen = app.add_subcommand("generate", "generate a pilot-observation dataset");
  add_common(gen, gen_o, false);
  gen->add_option("--snr", gen_snr, "SNR in dB (default: first entry of snr_grid)");
  gen->add_option("--antennas", gen_n, "number of BS antennas N (M = N)");
  gen->add_option("--samples", gen_samples, "number of samples S");
  gen->add_option("--pilots", gen_pilots, "unitary-dft | identity | random-qpsk");
  gen->add_option("--csv", gen_csv, "also export the dataset as CSV");

  std::string train_dataset, train_arch = "bilstm-gru";
  auto* trn = app.add_subcommand("train", "train a learned estimator on a dataset");
  add_common(trn, train_o, false);
  trn->add_option("--dataset", train_dataset, "dataset file")->required();
  trn->add_option("--arch", train_arch, "bilstm-gru | lstm | dnn");

  std::string eval_dataset, eval_model, eval_format = "csv";
  auto* ev = app.add_subcommand("evaluate", "NMSE of estimators on a dataset's test split");
  add_common(ev, eval_o, true);
  ev->add_option("--dataset", eval_dataset, "dataset file")->required();
  ev->add_option("--model", eval_model, "checkpoint to evaluate instead of training");
  ev->add_option("--format", eval_format, "csv | pretty-table");

  std::string snr_format = "csv";
  auto* ss = app.add_subcommand("sweep-snr", "NMSE vs SNR sweep");
  add_common(ss, snr_o, true);
  ss->add_option("--format", snr_format, "csv | pretty-table");

  std::string pn_format = "csv";
  std::vector<double> pn_grid;
  auto* ps = app.add_subcommand("sweep-pn", "NMSE vs phase-noise variance sweep");
  add_common(ps, pn_o, true);
  ps->add_option("--format", pn_format, "csv | pretty-table");
  ps->add_option("--pn-grid", pn_grid, "phase-noise variances (rad^2)")->delimiter(',');

  std::string rep_in, rep_out, rep_format = "pretty-table";
  auto* rep = app.add_subcommand("report", "re-emit a report CSV");
  CommonOptions rep_o;
  add_common(rep, rep_o, false);
  rep->add_option("--in", rep_in, "report CSV")->required();
  rep->add_option("--format", rep_format, "csv | pretty-table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) {
      thz::ExperimentConfig cfg = resolve(gen_o);
      require_out(gen_o);
      thz::ScenarioConfig sc = cfg.scenario;
      if (gen_n) sc = sc.with_antennas(*gen_n);
      const double snr = gen_snr ? *gen_snr : (sc.snr_grid.empty() ? 0.0 : sc.snr_grid.front());
      const auto kind = gen_pilots.empty() ? cfg.pilot_kind : thz::parse_pilot_kind(gen_pilots);
      const auto ds = thz::generate_dataset(sc, gen_samples ? *gen_samples : cfg.samples, snr, kind,
                                            cfg.gen_threads);
      thz::save_dataset(ds, gen_o.out);
      if (!gen_csv.empty()) thz::export_dataset_csv(ds, gen_csv);
      std::cout << "wrote " << ds.size() << " samples (N=" << sc.num_antennas
                << ", M=" << sc.num_pilots << ", SNR=" << snr << " dB) to " << gen_o.out << '\n';
    } else if (trn->parsed()) {
      thz::ExperimentConfig cfg = resolve(train_o);
      require_out(train_o);
      const auto ds = thz::load_dataset(train_dataset);
      const std::size_t n = ds.manifest.scenario.num_antennas;
      const auto spec = thz::nn::make_spec(thz::nn::parse_arch(train_arch),
                                           ds.manifest.scenario.num_pilots, n, cfg.hidden_for(n),
                                           cfg.dnn_hidden);
      const auto res = thz::nn::train_on_dataset(spec, ds, cfg.train);
      thz::nn::save_checkpoint(spec, res.params, train_o.out);
      std::cout << "epoch,train_mse,val_mse\n0,"
                << thz::format_double(res.history.initial_train_loss) << ','
                << thz::format_double(res.history.initial_val_loss) << '\n';
      for (const auto& e : res.history.epochs)
        std::cout << e.epoch << ',' << thz::format_double(e.train_loss) << ','
                  << thz::format_double(e.val_loss) << '\n';
      std::cout << "best epoch " << res.history.best_epoch << ", saved " << train_o.out << '\n';
    } else if (ev->parsed()) {
      thz::ExperimentConfig cfg = resolve(eval_o);
      const auto ds = thz::load_dataset(eval_dataset);
      thz::EvalReport report = thz::new_report(cfg);
      report.seed = ds.manifest.scenario.seed;
      std::vector<thz::CVector> truth;
      for (const auto& s : ds.test()) truth.push_back(s.truth);
      auto add_row = [&](const std::string& name, const std::vector<thz::CVector>& est) {
        const auto& sc = ds.manifest.scenario;
        report.rows.push_back({name, sc.num_antennas, sc.num_pilots, ds.manifest.snr_db,
                               sc.pn_var_tx, sc.pn_var_rx, thz::nmse_db(truth, est), truth.size()});
      };
      if (!eval_model.empty()) {
        const auto ck = thz::nn::load_checkpoint(eval_model);
        std::vector<thz::CVector> est;
        for (const auto& s : ds.test()) est.push_back(thz::nn::predict_channel(ck.params, ck.spec, s));
        add_row(thz::nn::to_string(ck.spec.arch), est);
      } else {
        for (const auto& name : thz::parse_estimators(eval_o.estimators))
          add_row(name, thz::estimate_test_split(name, ds, cfg));
      }
      report.sort_rows();
      write_report(report, eval_o.out, eval_format);
    } else if (ss->parsed()) {
      const thz::ExperimentConfig cfg = resolve(snr_o);
      const auto report =
          thz::run_snr_sweep(cfg, thz::parse_estimators(snr_o.estimators), cfg.scenario.snr_grid);
      write_report(report, snr_o.out, snr_format);
      for (const auto& f : report.failures)
        std::cerr << "warning kind=cell-failure estimator=" << f.estimator << " n=" << f.n_antennas
                  << " snr_db=" << f.snr_db << " message=" << quote(f.message) << '\n';
    } else if (ps->parsed()) {
      const thz::ExperimentConfig cfg = resolve(pn_o);
      const auto grid = pn_grid.empty() ? cfg.pn_grid : pn_grid;
      const auto report = thz::run_pn_sweep(cfg, thz::parse_estimators(pn_o.estimators), grid,
                                            cfg.scenario.snr_grid);
      write_report(report, pn_o.out, pn_format);
      for (const auto& f : report.failures)
        std::cerr << "warning kind=cell-failure estimator=" << f.estimator << " n=" << f.n_antennas
                  << " snr_db=" << f.snr_db << " message=" << quote(f.message) << '\n';
    } else if (rep->parsed()) {
      const auto report = thz::load_report_csv(rep_in);
      write_report(report, rep_o.out, rep_format);
    }
  } catch (const thz::Error& e) {
    std::cerr << "error kind=" << thz::to_string(e.kind()) << " message=" << quote(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error kind=internal message=" << quote(e.what()) << '\n';
    return 1;
  }
  return 0;
}
