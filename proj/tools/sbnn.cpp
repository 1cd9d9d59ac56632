// Command-line front end. Links only the C interface.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sbnn/sbnn.h"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr int kSchemaVersion = 1;

enum Exit { ok = 0, internal = 1, config = 2, numerical = 3, io = 4 };

struct Failure {
  int code;
  std::string message;
};

int exit_code(sbnn_status s) {
  switch (s) {
    case SBNN_OK: return ok;
    case SBNN_ERR_INVALID_ARGUMENT:
    case SBNN_ERR_CONFIG: return config;
    case SBNN_ERR_NUMERICAL: return numerical;
    case SBNN_ERR_IO: return io;
    default: return internal;
  }
}

void check(sbnn_status s) {
  for (std::size_t i = 0; i < sbnn_warning_count(); ++i)
    std::cerr << "warning: " << sbnn_warning(i) << '\n';
  if (s != SBNN_OK) throw Failure{exit_code(s), sbnn_last_error()};
}

[[noreturn]] void config_error(const std::string& msg) { throw Failure{config, msg}; }

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<sbnn_dataset, Deleter<sbnn_dataset, sbnn_dataset_free>>;
using Scaler = std::unique_ptr<sbnn_scaler, Deleter<sbnn_scaler, sbnn_scaler_free>>;
using Ckpt = std::unique_ptr<sbnn_checkpoint, Deleter<sbnn_checkpoint, sbnn_checkpoint_free>>;
using Log = std::unique_ptr<sbnn_train_log, Deleter<sbnn_train_log, sbnn_train_log_free>>;

struct Options {
  std::string out = ".";
  std::uint64_t seed = 1;

  double prior_pi = 0.5, log_tau1 = 1.0, log_tau0 = -6.0;
  double noise_variance = 1.0;
  std::vector<std::size_t> hidden{50};
  std::string activation = "relu";

  double lr = 0.01;
  std::size_t epochs = 100, batch = 128, mc_samples = 1;
  std::string optimizer = "adam", kl_schedule = "uniform";
  double init_m_std = 0.1, init_rho = -3.0;

  std::string data, target = "y", test, truth, checkpoint, scaler, manifest;
  std::string synthetic = "none", link = "nonlinear";
  std::size_t n = 2000, features = 100;
  double alpha = 2.0, alpha_mix = 0.5, pi_active = 0.2;
  double train_fraction = 0.9;
  bool standardize = true;

  std::string rule = "p";
  std::vector<double> droprates{0.0, 0.10, 0.20, 0.25, 0.50, 0.75, 0.80, 0.90, 0.95};
  double quantile = 0.8;
  bool cv = false;
  std::size_t folds = 10;
  std::vector<double> cv_grid;
  std::size_t repeats = 5;

  std::size_t draws = 100000;
  std::vector<double> grad_m{0.0, 0.05, 0.5, 2.0};
  std::vector<double> grad_sigma{0.01, 0.1, 1.0};
};

void add_options(CLI::App& app, Options& o) {
  app.set_config("--config", "", "flat key = value file; command-line flags take precedence");
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  app.add_option("--seed", o.seed, "random seed")->capture_default_str();

  app.add_option("--prior-pi", o.prior_pi, "prior slab probability pi")->capture_default_str();
  app.add_option("--log-tau1", o.log_tau1, "log slab standard deviation")->capture_default_str();
  app.add_option("--log-tau0", o.log_tau0, "log spike standard deviation")->capture_default_str();
  app.add_option("--noise-variance", o.noise_variance, "regression likelihood variance")
      ->capture_default_str();
  app.add_option("--hidden", o.hidden, "hidden layer widths")->delimiter(',')->capture_default_str();
  app.add_option("--activation", o.activation)
      ->check(CLI::IsMember({"relu", "tanh"}))
      ->capture_default_str();

  app.add_option("--lr", o.lr, "learning rate")->capture_default_str();
  app.add_option("--epochs", o.epochs)->capture_default_str();
  app.add_option("--batch", o.batch, "minibatch size")->capture_default_str();
  app.add_option("--mc-samples", o.mc_samples, "draws per step")->capture_default_str();
  app.add_option("--optimizer", o.optimizer)
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  app.add_option("--kl-schedule", o.kl_schedule)
      ->check(CLI::IsMember({"uniform", "blundell"}))
      ->capture_default_str();
  app.add_option("--init-m-std", o.init_m_std)->capture_default_str();
  app.add_option("--init-rho", o.init_rho)->capture_default_str();

  app.add_option("--data", o.data, "CSV dataset (header row, comma separated)");
  app.add_option("--target", o.target, "response column")->capture_default_str();
  app.add_option("--test", o.test, "held-out CSV in original units");
  app.add_option("--truth", o.truth, "ground-truth CSV: feature_index,z,beta");
  app.add_option("--checkpoint", o.checkpoint);
  app.add_option("--scaler", o.scaler, "standardizer written by train");
  app.add_option("--manifest", o.manifest, "CSV: name,path,target,rows,features");
  app.add_option("--synthetic", o.synthetic, "generate data instead of --data")
      ->check(CLI::IsMember({"none", "two_feature", "sparse"}))
      ->capture_default_str();
  app.add_option("--n", o.n)->capture_default_str();
  app.add_option("--features", o.features)->capture_default_str();
  app.add_option("--alpha", o.alpha, "effect sizes beta_j = j / alpha")->capture_default_str();
  app.add_option("--alpha-mix", o.alpha_mix, "two-feature mixing weight")->capture_default_str();
  app.add_option("--pi-active", o.pi_active)->capture_default_str();
  app.add_option("--link", o.link)
      ->check(CLI::IsMember({"linear", "nonlinear"}))
      ->capture_default_str();
  app.add_option("--train-fraction", o.train_fraction)->capture_default_str();
  app.add_option("--standardize", o.standardize)->capture_default_str();

  app.add_option("--rule", o.rule)->check(CLI::IsMember({"p", "m2", "snr"}))->capture_default_str();
  app.add_option("--droprates", o.droprates)->delimiter(',')->capture_default_str();
  app.add_option("--quantile", o.quantile, "phi quantile used as the selection threshold")
      ->capture_default_str();
  app.add_flag("--cv", o.cv, "choose the keep-proportion by cross-validation");
  app.add_option("--folds", o.folds)->capture_default_str();
  app.add_option("--cv-grid", o.cv_grid, "candidate keep-proportions")->delimiter(',');
  app.add_option("--repeats", o.repeats)->capture_default_str();

  app.add_option("--draws", o.draws)->capture_default_str();
  app.add_option("--grad-m", o.grad_m)->delimiter(',')->capture_default_str();
  app.add_option("--grad-sigma", o.grad_sigma)->delimiter(',')->capture_default_str();
}

sbnn_model_spec model_spec(const Options& o) {
  sbnn_model_spec s;
  sbnn_model_spec_default(&s);
  s.hidden = o.hidden.data();
  s.hidden_count = o.hidden.size();
  s.activation = o.activation == "tanh" ? SBNN_TANH : SBNN_RELU;
  s.prior = sbnn_prior{o.prior_pi, o.log_tau1, o.log_tau0};
  s.noise_variance = o.noise_variance;
  return s;
}

sbnn_train_options train_options(const Options& o) {
  sbnn_train_options t;
  sbnn_train_options_default(&t);
  t.epochs = o.epochs;
  t.batch_size = o.batch;
  t.learning_rate = o.lr;
  t.optimizer = o.optimizer == "sgd" ? SBNN_SGD : SBNN_ADAM;
  t.mc_samples = o.mc_samples;
  t.kl_schedule = o.kl_schedule == "blundell" ? SBNN_KL_BLUNDELL : SBNN_KL_UNIFORM;
  t.seed = o.seed;
  t.init_m_std = o.init_m_std;
  t.init_rho = o.init_rho;
  return t;
}

sbnn_rule rule_of(const std::string& r) {
  if (r == "m2") return SBNN_RULE_M2;
  if (r == "snr") return SBNN_RULE_SNR;
  return SBNN_RULE_P;
}

// The prior is checked up front so a bad prior fails before any data work.
void check_prior(const Options& o) {
  if (!(o.prior_pi > 0.0 && o.prior_pi < 1.0))
    config_error("prior requires 0 < pi < 1, got pi=" + std::to_string(o.prior_pi));
  if (!(o.log_tau0 < o.log_tau1))
    config_error("prior requires tau0 < tau1, got log tau0=" + std::to_string(o.log_tau0) +
                 " >= log tau1=" + std::to_string(o.log_tau1));
}

fs::path out_dir(const Options& o) {
  fs::path p(o.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Failure{io, "cannot create output directory '" + o.out + "': " + ec.message()};
  return p;
}

Dataset load(const std::string& path, const std::string& target) {
  sbnn_dataset* d = nullptr;
  check(sbnn_dataset_load_csv(path.c_str(), target.c_str(), 0, 0, &d));
  return Dataset(d);
}

Dataset input_data(const Options& o) {
  sbnn_dataset* d = nullptr;
  if (o.synthetic == "two_feature") {
    check(sbnn_dataset_two_feature(o.alpha_mix, o.n, o.seed, &d));
  } else if (o.synthetic == "sparse") {
    sbnn_synthetic_spec s;
    sbnn_synthetic_default(&s);
    s.n = o.n;
    s.features = o.features;
    s.alpha = o.alpha;
    s.pi_active = o.pi_active;
    s.link = o.link == "linear" ? SBNN_LINK_LINEAR : SBNN_LINK_NONLINEAR;
    s.seed = o.seed;
    check(sbnn_dataset_synthetic(&s, &d));
  } else {
    if (o.data.empty()) config_error("train needs --data or --synthetic");
    return load(o.data, o.target);
  }
  return Dataset(d);
}

Scaler maybe_load_scaler(const Options& o) {
  if (o.scaler.empty()) return nullptr;
  sbnn_scaler* s = nullptr;
  check(sbnn_scaler_load(o.scaler.c_str(), &s));
  return Scaler(s);
}

Ckpt load_checkpoint(const Options& o) {
  if (o.checkpoint.empty()) config_error("--checkpoint is required");
  sbnn_checkpoint* c = nullptr;
  check(sbnn_checkpoint_load(o.checkpoint.c_str(), &c));
  return Ckpt(c);
}

void save_run_config(const CLI::App& app, const fs::path& dir, const std::string& command) {
  std::ofstream f(dir / "run.ini");
  f << "# schema_version=" << kSchemaVersion << "\n# command: " << command << '\n'
    << app.config_to_str(true, false);
}

int cmd_train(const CLI::App& app, const Options& o) {
  check_prior(o);
  const auto dir = out_dir(o);
  Dataset all = input_data(o);
  Dataset train, test;
  if (!o.test.empty()) {
    train = std::move(all);
    test = load(o.test, o.target);
  } else if (o.train_fraction < 1.0) {
    sbnn_dataset *a = nullptr, *b = nullptr;
    check(sbnn_dataset_split(all.get(), o.train_fraction, o.seed, &a, &b));
    train.reset(a);
    test.reset(b);
  } else {
    train = std::move(all);
  }
  if (o.synthetic == "sparse") check(sbnn_dataset_save_truth(train.get(), (dir / "truth.csv").c_str()));
  check(sbnn_dataset_save_csv(train.get(), (dir / "train.csv").c_str()));
  if (test) check(sbnn_dataset_save_csv(test.get(), (dir / "test.csv").c_str()));

  Scaler scaler;
  Dataset fit_on;
  if (o.standardize) {
    sbnn_scaler* s = nullptr;
    check(sbnn_scaler_fit(train.get(), 1, &s));
    scaler.reset(s);
    check(sbnn_scaler_save(s, (dir / "scaler.txt").c_str()));
    sbnn_dataset* st = nullptr;
    check(sbnn_scaler_apply(s, train.get(), &st));
    fit_on.reset(st);
  }
  const sbnn_dataset* data = fit_on ? fit_on.get() : train.get();

  const auto spec = model_spec(o);
  const auto opts = train_options(o);
  sbnn_checkpoint* c = nullptr;
  sbnn_train_log* l = nullptr;
  check(sbnn_train(&spec, data, &opts, &c, &l));
  Ckpt ckpt(c);
  Log log(l);
  check(sbnn_checkpoint_save(c, (dir / "checkpoint.bin").c_str()));

  std::ofstream metrics(dir / "metrics.jsonl");
  for (std::size_t e = 0; e < sbnn_train_log_epochs(l); ++e) {
    sbnn_epoch_record r;
    check(sbnn_train_log_get(l, e, &r));
    metrics << json{{"schema_version", kSchemaVersion},
                    {"epoch", r.epoch},
                    {"objective", r.objective},
                    {"train_loss", r.train_loss},
                    {"wall_ms", r.wall_ms}}
                   .dump()
            << '\n';
  }
  save_run_config(app, dir, "train");
  std::cout << "trained " << sbnn_checkpoint_param_count(c) << " parameters for " << o.epochs
            << " epochs; outputs in " << dir.string() << '\n';
  return ok;
}

int cmd_prune(const CLI::App& app, const Options& o) {
  if (o.test.empty()) config_error("prune needs --test");
  for (double d : o.droprates)
    if (!(d >= 0.0 && d < 1.0)) config_error("droprates must lie in [0, 1)");
  const auto dir = out_dir(o);
  Ckpt ckpt = load_checkpoint(o);
  Dataset test = load(o.test, o.target);
  Scaler scaler = maybe_load_scaler(o);
  std::vector<sbnn_prune_row> rows(o.droprates.size());
  check(sbnn_prune_curve(ckpt.get(), test.get(), scaler.get(), rule_of(o.rule), o.droprates.data(),
                         o.droprates.size(), rows.data()));
  check(sbnn_write_prune_csv(rows.data(), rows.size(), (dir / "prune.csv").c_str()));
  save_run_config(app, dir, "prune");
  std::printf("%-9s %-9s %-12s\n", "droprate", "sparsity", "test_rmse");
  for (const auto& r : rows) std::printf("%-9.3f %-9.4f %-12.6g\n", r.droprate, r.sparsity, r.test_rmse);
  return ok;
}

int cmd_importance(const CLI::App& app, const Options& o) {
  if (!(o.quantile >= 0.0 && o.quantile < 1.0)) config_error("--quantile must lie in [0, 1)");
  const auto dir = out_dir(o);
  Ckpt ckpt = load_checkpoint(o);
  check(sbnn_importance_csv(ckpt.get(), o.quantile, (dir / "importance.csv").c_str()));
  save_run_config(app, dir, "importance");
  std::cout << "wrote " << (dir / "importance.csv").string() << " ("
            << sbnn_checkpoint_inputs(ckpt.get()) << " features)\n";
  return ok;
}

int cmd_select(const CLI::App& app, const Options& o) {
  if (o.data.empty()) config_error("select needs --data (training rows)");
  const auto dir = out_dir(o);
  Ckpt ckpt = load_checkpoint(o);
  Scaler scaler = maybe_load_scaler(o);
  Dataset train_raw = load(o.data, o.target);
  if (!o.truth.empty()) check(sbnn_dataset_load_truth(train_raw.get(), o.truth.c_str()));
  auto prepare = [&](Dataset raw) {
    if (!scaler) return raw;
    sbnn_dataset* s = nullptr;
    check(sbnn_scaler_apply(scaler.get(), raw.get(), &s));
    return Dataset(s);
  };
  Dataset train = prepare(std::move(train_raw));
  Dataset test;
  if (!o.test.empty()) test = load(o.test, o.target);

  const auto spec = model_spec(o);
  const auto opts = train_options(o);
  json report{{"schema_version", kSchemaVersion}};
  double keep = 1.0 - o.quantile;
  if (o.cv) {
    std::vector<double> grid = o.cv_grid;
    if (grid.empty())
      for (int k = 1; k <= 20; ++k) grid.push_back(0.05 * k);
    std::vector<double> errors(grid.size());
    check(sbnn_cv_threshold(&spec, train.get(), &opts, o.folds, grid.data(), grid.size(), o.seed,
                            &keep, errors.data()));
    report["cv"] = {{"folds", o.folds}, {"proportions", grid}, {"mean_errors", errors},
                    {"best_proportion", keep}};
  } else if (!(o.quantile > 0.0 && o.quantile < 1.0)) {
    config_error("--quantile must lie in (0, 1)");
  }
  sbnn_selection sel{};
  if (keep >= 1.0) {
    report["note"] = "cross-validation kept every feature; no refit performed";
    sel.keep_proportion = sel.active_proportion = 1.0;
    sel.accuracy = sel.refit_test_mse = sel.full_test_mse = -1.0;
  } else {
    sbnn_checkpoint* refit = nullptr;
    check(sbnn_select(ckpt.get(), train.get(), test.get(), scaler.get(), keep, &opts, &sel,
                      &refit));
    Ckpt owned(refit);
    check(sbnn_checkpoint_save(refit, (dir / "refit.bin").c_str()));
  }
  report["keep_proportion"] = sel.keep_proportion;
  report["active_proportion"] = sel.active_proportion;
  report["threshold"] = sel.threshold;
  report["accuracy"] = sel.accuracy >= 0.0 ? json(sel.accuracy) : json(nullptr);
  report["refit_test_mse"] = sel.refit_test_mse >= 0.0 ? json(sel.refit_test_mse) : json(nullptr);
  report["full_test_mse"] = sel.full_test_mse >= 0.0 ? json(sel.full_test_mse) : json(nullptr);
  std::ofstream(dir / "selection.json") << report.dump(2) << '\n';
  save_run_config(app, dir, "select");
  std::cout << report.dump(2) << '\n';
  return ok;
}

int cmd_benchmark(const CLI::App& app, const Options& o) {
  check_prior(o);
  if (o.manifest.empty()) config_error("benchmark needs --manifest");
  if (o.repeats < 1) config_error("--repeats must be at least 1");
  const auto dir = out_dir(o);
  const auto spec = model_spec(o);
  const auto opts = train_options(o);
  check(sbnn_benchmark(o.manifest.c_str(), &spec, &opts, o.train_fraction, o.repeats,
                       o.droprates.data(), o.droprates.size(), rule_of(o.rule),
                       (dir / "benchmark.csv").c_str()));
  save_run_config(app, dir, "benchmark");
  std::ifstream in(dir / "benchmark.csv");
  std::cout << in.rdbuf();
  return ok;
}

int cmd_gradcheck(const CLI::App& app, const Options& o) {
  check_prior(o);
  if (o.draws < 1) config_error("--draws must be at least 1");
  const auto dir = out_dir(o);
  std::vector<sbnn_grad_setting> grid;
  for (double m : o.grad_m)
    for (double s : o.grad_sigma)
      grid.push_back({m, s, sbnn_prior{o.prior_pi, o.log_tau1, o.log_tau0}});
  check(sbnn_gradcheck(grid.data(), grid.size(), o.draws, o.seed, (dir / "gradcheck.csv").c_str()));
  save_run_config(app, dir, "gradcheck");
  std::ifstream in(dir / "gradcheck.csv");
  std::cout << in.rdbuf();
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Bayesian neural networks with spike-and-slab variational inference"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  add_options(app, o);
  auto* train = app.add_subcommand("train", "fit a network; writes checkpoint and metrics");
  auto* prune = app.add_subcommand("prune", "test error of a checkpoint across droprates");
  auto* importance = app.add_subcommand("importance", "per-feature psi and phi");
  auto* select = app.add_subcommand("select", "feature selection and refit");
  auto* bench = app.add_subcommand("benchmark", "pruning table across a dataset manifest");
  auto* grad = app.add_subcommand("gradcheck", "closed-form vs sampled penalty gradients");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return config;
  }

  try {
    if (*train) return cmd_train(app, o);
    if (*prune) return cmd_prune(app, o);
    if (*importance) return cmd_importance(app, o);
    if (*select) return cmd_select(app, o);
    if (*bench) return cmd_benchmark(app, o);
    if (*grad) return cmd_gradcheck(app, o);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return internal;
  }
  return internal;
}
