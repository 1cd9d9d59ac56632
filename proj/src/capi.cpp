#include "sbnn/sbnn.h"

#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <new>
#include <string>
#include <vector>

#include "sbnn/checkpoint.hpp"
#include "sbnn/compress.hpp"
#include "sbnn/data.hpp"
#include "sbnn/error.hpp"
#include "sbnn/experiments.hpp"
#include "sbnn/gradlab.hpp"
#include "sbnn/trainer.hpp"

struct sbnn_dataset {
  sbnn::Dataset d;
};
struct sbnn_scaler {
  sbnn::Standardizer s;
};
struct sbnn_checkpoint {
  sbnn::Checkpoint c;
};
struct sbnn_train_log {
  std::vector<sbnn::EpochRecord> epochs;
};

namespace {

thread_local std::string g_error;
thread_local std::vector<std::string> g_warnings;

sbnn_status status_of(sbnn::ErrorKind kind) {
  switch (kind) {
    case sbnn::ErrorKind::invalid_argument: return SBNN_ERR_INVALID_ARGUMENT;
    case sbnn::ErrorKind::config: return SBNN_ERR_CONFIG;
    case sbnn::ErrorKind::io: return SBNN_ERR_IO;
    case sbnn::ErrorKind::numerical: return SBNN_ERR_NUMERICAL;
  }
  return SBNN_ERR_INTERNAL;
}

template <class F>
sbnn_status guarded(F&& body) {
  g_error.clear();
  g_warnings.clear();
  try {
    body();
    return SBNN_OK;
  } catch (const sbnn::Error& e) {
    g_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
  } catch (const std::exception& e) {
    g_error = e.what();
  } catch (...) {
    g_error = "unknown failure";
  }
  return SBNN_ERR_INTERNAL;
}

void need(const void* p, const char* what) {
  if (!p) sbnn::fail(sbnn::ErrorKind::invalid_argument, std::string(what) + " is NULL");
}

sbnn::SpikeSlabPrior to_prior(const sbnn_prior& p) {
  try {
    return sbnn::SpikeSlabPrior::from_log_taus(p.pi, p.log_tau1, p.log_tau0);
  } catch (const sbnn::Error& e) {
    sbnn::fail(sbnn::ErrorKind::config, e.what());
  }
}

sbnn::Activation to_activation(sbnn_activation a) {
  switch (a) {
    case SBNN_RELU: return sbnn::Activation::relu;
    case SBNN_TANH: return sbnn::Activation::tanh;
    case SBNN_IDENTITY: return sbnn::Activation::identity;
  }
  sbnn::fail(sbnn::ErrorKind::config, "unknown activation");
}

sbnn::RankRule to_rule(sbnn_rule r) {
  switch (r) {
    case SBNN_RULE_P: return sbnn::RankRule::inclusion_p;
    case SBNN_RULE_M2: return sbnn::RankRule::second_moment;
    case SBNN_RULE_SNR: return sbnn::RankRule::snr;
  }
  sbnn::fail(sbnn::ErrorKind::config, "unknown ranking rule");
}

sbnn::Setup to_setup(const sbnn_model_spec& spec) {
  sbnn::Setup s;
  if (spec.hidden_count > 0) need(spec.hidden, "hidden widths");
  s.hidden.assign(spec.hidden, spec.hidden + spec.hidden_count);
  s.activation = to_activation(spec.activation);
  s.prior = to_prior(spec.prior);
  if (!(spec.noise_variance > 0.0))
    sbnn::fail(sbnn::ErrorKind::config, "noise variance must be positive");
  s.noise_variance = spec.noise_variance;
  return s;
}

sbnn::TrainConfig to_config(const sbnn_train_options& o) {
  sbnn::TrainConfig c;
  c.epochs = o.epochs;
  c.batch_size = o.batch_size;
  c.learning_rate = o.learning_rate;
  c.optimizer = o.optimizer == SBNN_SGD ? sbnn::OptimizerKind::sgd : sbnn::OptimizerKind::adam;
  c.adam_beta1 = o.adam_beta1;
  c.adam_beta2 = o.adam_beta2;
  c.adam_eps = o.adam_eps;
  c.mc_samples = o.mc_samples;
  c.kl_schedule =
      o.kl_schedule == SBNN_KL_BLUNDELL ? sbnn::KlSchedule::blundell : sbnn::KlSchedule::uniform;
  c.seed = o.seed;
  c.init_m_std = o.init_m_std;
  c.init_rho = o.init_rho;
  try {
    c.validate();
  } catch (const sbnn::Error& e) {
    sbnn::fail(sbnn::ErrorKind::config, e.what());
  }
  return c;
}

}  // namespace

extern "C" {

const char* sbnn_version(void) { return "1.0.0"; }
const char* sbnn_last_error(void) { return g_error.c_str(); }
size_t sbnn_warning_count(void) { return g_warnings.size(); }
const char* sbnn_warning(size_t index) {
  return index < g_warnings.size() ? g_warnings[index].c_str() : nullptr;
}

void sbnn_train_options_default(sbnn_train_options* out) {
  if (!out) return;
  const sbnn::TrainConfig c;
  *out = sbnn_train_options{c.epochs,
                            c.batch_size,
                            c.learning_rate,
                            SBNN_ADAM,
                            c.adam_beta1,
                            c.adam_beta2,
                            c.adam_eps,
                            c.mc_samples,
                            SBNN_KL_UNIFORM,
                            c.seed,
                            c.init_m_std,
                            c.init_rho};
}

void sbnn_synthetic_default(sbnn_synthetic_spec* out) {
  if (!out) return;
  const sbnn::SyntheticSpec s;
  *out = sbnn_synthetic_spec{s.n, s.features, s.alpha, s.pi_active, SBNN_LINK_NONLINEAR, s.seed};
}

void sbnn_model_spec_default(sbnn_model_spec* out) {
  if (!out) return;
  *out = sbnn_model_spec{nullptr, 0, SBNN_RELU, sbnn_prior{0.5, 1.0, -6.0}, 1.0};
}

sbnn_status sbnn_dataset_load_csv(const char* path, const char* target_column,
                                  size_t expected_rows, size_t expected_features,
                                  sbnn_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(target_column, "target column");
    need(out, "output handle");
    *out = nullptr;
    sbnn::CsvSchema schema{target_column, expected_rows, expected_features};
    *out = new sbnn_dataset{sbnn::load_csv(path, schema)};
  });
}

sbnn_status sbnn_dataset_two_feature(double alpha_mix, size_t n, uint64_t seed,
                                     sbnn_dataset** out) {
  return guarded([&] {
    need(out, "output handle");
    *out = nullptr;
    *out = new sbnn_dataset{sbnn::gen_two_feature(alpha_mix, n, seed)};
  });
}

sbnn_status sbnn_dataset_synthetic(const sbnn_synthetic_spec* spec, sbnn_dataset** out) {
  return guarded([&] {
    need(spec, "synthetic spec");
    need(out, "output handle");
    *out = nullptr;
    sbnn::SyntheticSpec s;
    s.n = spec->n;
    s.features = spec->features;
    s.alpha = spec->alpha;
    s.pi_active = spec->pi_active;
    s.link = spec->link == SBNN_LINK_LINEAR ? sbnn::Link::linear : sbnn::Link::nonlinear;
    s.seed = spec->seed;
    *out = new sbnn_dataset{sbnn::gen_sparse_regression(s)};
  });
}

sbnn_status sbnn_dataset_save_csv(const sbnn_dataset* d, const char* path) {
  return guarded([&] {
    need(d, "dataset");
    need(path, "path");
    sbnn::save_csv(path, d->d);
  });
}

sbnn_status sbnn_dataset_save_truth(const sbnn_dataset* d, const char* path) {
  return guarded([&] {
    need(d, "dataset");
    need(path, "path");
    if (!d->d.has_truth()) sbnn::fail(sbnn::ErrorKind::invalid_argument, "dataset has no ground truth");
    std::ofstream f(path);
    if (!f) sbnn::fail(sbnn::ErrorKind::io, std::string("cannot write '") + path + "'");
    f << "feature_index,z,beta\n" << std::setprecision(17);
    for (std::size_t j = 0; j < d->d.z_true.size(); ++j)
      f << j << ',' << int(d->d.z_true[j]) << ',' << (j < d->d.beta.size() ? d->d.beta[j] : 0.0)
        << '\n';
  });
}

sbnn_status sbnn_dataset_load_truth(sbnn_dataset* d, const char* path) {
  return guarded([&] {
    need(d, "dataset");
    need(path, "path");
    const auto t = sbnn::load_csv(path, sbnn::CsvSchema{"beta", d->d.features(), 2});
    std::vector<std::uint8_t> z(t.rows());
    for (std::size_t j = 0; j < t.rows(); ++j) {
      if (t.x(j, 0) != double(j))
        sbnn::fail(sbnn::ErrorKind::config, "truth file rows must be ordered by feature_index");
      z[j] = t.x(j, 1) != 0.0 ? 1 : 0;
    }
    d->d.z_true = std::move(z);
    d->d.beta = t.y;
  });
}

size_t sbnn_dataset_rows(const sbnn_dataset* d) { return d ? d->d.rows() : 0; }
size_t sbnn_dataset_features(const sbnn_dataset* d) { return d ? d->d.features() : 0; }

sbnn_status sbnn_dataset_split(const sbnn_dataset* d, double train_fraction, uint64_t seed,
                               sbnn_dataset** train, sbnn_dataset** test) {
  return guarded([&] {
    need(d, "dataset");
    need(train, "train handle");
    need(test, "test handle");
    *train = *test = nullptr;
    auto [a, b] = sbnn::split(d->d, train_fraction, seed);
    auto* ta = new sbnn_dataset{std::move(a)};
    try {
      *test = new sbnn_dataset{std::move(b)};
    } catch (...) {
      delete ta;
      throw;
    }
    *train = ta;
  });
}

void sbnn_dataset_free(sbnn_dataset* d) { delete d; }

sbnn_status sbnn_scaler_fit(const sbnn_dataset* train, int standardize_y, sbnn_scaler** out) {
  return guarded([&] {
    need(train, "dataset");
    need(out, "output handle");
    *out = nullptr;
    *out = new sbnn_scaler{sbnn::Standardizer::fit(train->d, standardize_y != 0, &g_warnings)};
  });
}

sbnn_status sbnn_scaler_apply(const sbnn_scaler* s, const sbnn_dataset* in, sbnn_dataset** out) {
  return guarded([&] {
    need(s, "scaler");
    need(in, "dataset");
    need(out, "output handle");
    *out = nullptr;
    *out = new sbnn_dataset{s->s.apply(in->d)};
  });
}

// Text format: "# schema_version=1", then "standardize_y,<0|1>", "y,<mean>,<std>",
// and one "x,<mean>,<std>" line per feature.
sbnn_status sbnn_scaler_save(const sbnn_scaler* s, const char* path) {
  return guarded([&] {
    need(s, "scaler");
    need(path, "path");
    std::ofstream f(path);
    if (!f) sbnn::fail(sbnn::ErrorKind::io, std::string("cannot write '") + path + "'");
    f << "# schema_version=1\n" << std::setprecision(17);
    f << "standardize_y," << (s->s.standardize_y ? 1 : 0) << '\n';
    f << "y," << s->s.y_mean << ',' << s->s.y_std << '\n';
    for (std::size_t j = 0; j < s->s.x_mean.size(); ++j)
      f << "x," << s->s.x_mean[j] << ',' << s->s.x_std[j] << '\n';
  });
}

sbnn_status sbnn_scaler_load(const char* path, sbnn_scaler** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "output handle");
    *out = nullptr;
    std::ifstream f(path);
    if (!f) sbnn::fail(sbnn::ErrorKind::io, std::string("cannot read '") + path + "'");
    sbnn::Standardizer s;
    std::string line;
    std::size_t lineno = 0;
    bool saw_y = false;
    while (std::getline(f, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      const auto c1 = line.find(',');
      const std::string key = line.substr(0, c1);
      try {
        if (key == "standardize_y") {
          s.standardize_y = std::stoi(line.substr(c1 + 1)) != 0;
        } else if (key == "y" || key == "x") {
          const auto c2 = line.find(',', c1 + 1);
          const double mean = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
          const double sd = std::stod(line.substr(c2 + 1));
          if (key == "y") {
            s.y_mean = mean;
            s.y_std = sd;
            saw_y = true;
          } else {
            s.x_mean.push_back(mean);
            s.x_std.push_back(sd);
          }
        } else {
          throw std::invalid_argument(key);
        }
      } catch (const std::logic_error&) {
        sbnn::fail(sbnn::ErrorKind::io, std::string(path) + ":" + std::to_string(lineno) +
                                            ": malformed scaler line");
      }
    }
    if (!saw_y) sbnn::fail(sbnn::ErrorKind::io, std::string(path) + ": missing response line");
    *out = new sbnn_scaler{std::move(s)};
  });
}

void sbnn_scaler_free(sbnn_scaler* s) { delete s; }

sbnn_status sbnn_train(const sbnn_model_spec* spec, const sbnn_dataset* train,
                       const sbnn_train_options* options, sbnn_checkpoint** out,
                       sbnn_train_log** log) {
  return guarded([&] {
    need(spec, "model spec");
    need(train, "dataset");
    need(options, "train options");
    need(out, "output handle");
    *out = nullptr;
    if (log) *log = nullptr;
    const sbnn::Setup setup = to_setup(*spec);
    const sbnn::TrainConfig cfg = to_config(*options);
    const sbnn::Model model = setup.model_for(train->d.features());
    auto report = sbnn::train(model, train->d, cfg);
    auto* c = new sbnn_checkpoint{sbnn::Checkpoint{model, std::move(report.params)}};
    if (log) {
      try {
        *log = new sbnn_train_log{std::move(report.epochs)};
      } catch (...) {
        delete c;
        throw;
      }
    }
    *out = c;
  });
}

size_t sbnn_train_log_epochs(const sbnn_train_log* log) { return log ? log->epochs.size() : 0; }

sbnn_status sbnn_train_log_get(const sbnn_train_log* log, size_t index, sbnn_epoch_record* out) {
  return guarded([&] {
    need(log, "train log");
    need(out, "output record");
    if (index >= log->epochs.size())
      sbnn::fail(sbnn::ErrorKind::invalid_argument, "epoch index out of range");
    const auto& e = log->epochs[index];
    *out = sbnn_epoch_record{e.epoch, e.objective, e.train_loss, e.wall_ms};
  });
}

void sbnn_train_log_free(sbnn_train_log* log) { delete log; }

sbnn_status sbnn_checkpoint_save(const sbnn_checkpoint* c, const char* path) {
  return guarded([&] {
    need(c, "checkpoint");
    need(path, "path");
    sbnn::save_checkpoint(path, c->c);
  });
}

sbnn_status sbnn_checkpoint_load(const char* path, sbnn_checkpoint** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "output handle");
    *out = nullptr;
    *out = new sbnn_checkpoint{sbnn::load_checkpoint(path)};
  });
}

size_t sbnn_checkpoint_param_count(const sbnn_checkpoint* c) {
  return c ? c->c.params.size() : 0;
}

size_t sbnn_checkpoint_inputs(const sbnn_checkpoint* c) {
  return c ? c->c.model.topology.inputs() : 0;
}

sbnn_status sbnn_checkpoint_params(const sbnn_checkpoint* c, double* m, double* rho, double* p) {
  return guarded([&] {
    need(c, "checkpoint");
    const auto& vp = c->c.params;
    if (m) std::copy(vp.m.begin(), vp.m.end(), m);
    if (rho) std::copy(vp.rho.begin(), vp.rho.end(), rho);
    if (p) std::copy(vp.p.begin(), vp.p.end(), p);
  });
}

void sbnn_checkpoint_free(sbnn_checkpoint* c) { delete c; }

sbnn_status sbnn_predict(const sbnn_checkpoint* c, const sbnn_dataset* d, double* out) {
  return guarded([&] {
    need(c, "checkpoint");
    need(d, "dataset");
    need(out, "output buffer");
    const auto y = sbnn::predict_response(c->c.model.topology, c->c.params, d->d.x);
    std::copy(y.begin(), y.end(), out);
  });
}

sbnn_status sbnn_prune(const sbnn_checkpoint* c, sbnn_rule rule, double droprate,
                       sbnn_checkpoint** out, double* sparsity) {
  return guarded([&] {
    need(c, "checkpoint");
    need(out, "output handle");
    *out = nullptr;
    auto [mask, vp] = sbnn::prune(c->c.params, to_rule(rule), droprate);
    if (sparsity) *sparsity = sbnn::sparsity(mask);
    *out = new sbnn_checkpoint{sbnn::Checkpoint{c->c.model, std::move(vp)}};
  });
}

sbnn_status sbnn_mask_save(const sbnn_checkpoint* pruned, sbnn_rule rule, double droprate,
                           const char* path) {
  return guarded([&] {
    need(pruned, "checkpoint");
    need(path, "path");
    sbnn::PruneMask mask;
    mask.rule = to_rule(rule);
    mask.droprate = droprate;
    mask.keep = pruned->c.params.keep;
    if (mask.keep.empty()) mask.keep.assign(pruned->c.params.size(), 1);
    sbnn::save_mask(path, mask);
  });
}

sbnn_status sbnn_prune_curve(const sbnn_checkpoint* c, const sbnn_dataset* test,
                             const sbnn_scaler* scaler, sbnn_rule rule, const double* droprates,
                             size_t count, sbnn_prune_row* rows) {
  return guarded([&] {
    need(c, "checkpoint");
    need(test, "test dataset");
    need(droprates, "droprates");
    need(rows, "output rows");
    const sbnn::Dataset data = scaler ? scaler->s.apply(test->d) : test->d;
    const auto curve =
        sbnn::pruning_curve(c->c.model, c->c.params, data, to_rule(rule),
                            std::span<const double>(droprates, count), scaler ? &scaler->s : nullptr);
    for (std::size_t k = 0; k < curve.size(); ++k)
      rows[k] = sbnn_prune_row{curve[k].droprate, curve[k].sparsity, curve[k].test_mse,
                               curve[k].test_rmse};
  });
}

sbnn_status sbnn_write_prune_csv(const sbnn_prune_row* rows, size_t count, const char* path) {
  return guarded([&] {
    need(rows, "rows");
    need(path, "path");
    std::vector<sbnn::PruneCurveRow> r(count);
    for (std::size_t k = 0; k < count; ++k)
      r[k] = {rows[k].droprate, rows[k].sparsity, rows[k].test_mse, rows[k].test_rmse};
    std::ofstream f(path);
    if (!f) sbnn::fail(sbnn::ErrorKind::io, std::string("cannot write '") + path + "'");
    sbnn::write_prune_csv(f, r);
  });
}

sbnn_status sbnn_importance(const sbnn_checkpoint* c, double keep_quantile, double* psi,
                            double* phi, uint8_t* selected, double* threshold) {
  return guarded([&] {
    need(c, "checkpoint");
    const auto rep =
        sbnn::importance_report(c->c.model.topology, c->c.params, keep_quantile, &g_warnings);
    if (psi) std::copy(rep.psi.begin(), rep.psi.end(), psi);
    if (phi) std::copy(rep.phi.begin(), rep.phi.end(), phi);
    if (selected) std::copy(rep.selected.begin(), rep.selected.end(), selected);
    if (threshold) *threshold = rep.threshold;
  });
}

sbnn_status sbnn_importance_csv(const sbnn_checkpoint* c, double keep_quantile,
                                const char* path) {
  return guarded([&] {
    need(c, "checkpoint");
    need(path, "path");
    const auto rep =
        sbnn::importance_report(c->c.model.topology, c->c.params, keep_quantile, &g_warnings);
    sbnn::write_importance_csv(path, rep);
  });
}

sbnn_status sbnn_select(const sbnn_checkpoint* c, const sbnn_dataset* train,
                        const sbnn_dataset* test, const sbnn_scaler* scaler,
                        double keep_proportion,
                        const sbnn_train_options* options, sbnn_selection* out,
                        sbnn_checkpoint** refit) {
  return guarded([&] {
    need(c, "checkpoint");
    need(train, "train dataset");
    need(options, "train options");
    need(out, "output report");
    if (refit) *refit = nullptr;
    if (!(keep_proportion > 0.0 && keep_proportion < 1.0))
      sbnn::fail(sbnn::ErrorKind::config, "keep proportion must lie in (0, 1)");
    const auto cfg = to_config(*options);
    const auto res = sbnn::variable_selection(c->c.model, c->c.params, train->d,
                                              1.0 - keep_proportion, cfg, &g_warnings);
    out->keep_proportion = keep_proportion;
    out->active_proportion = res.active_proportion;
    out->threshold = res.importance.threshold;
    out->accuracy = res.accuracy;
    out->refit_test_mse = -1.0;
    out->full_test_mse = -1.0;
    if (test) {
      const auto& topo = c->c.model.topology;
      const sbnn::Dataset data = scaler ? scaler->s.apply(test->d) : test->d;
      auto mse = [&](const sbnn::VariationalParams& vp, const sbnn::Matrix& x) {
        const auto pred = sbnn::predict_response(topo, vp, x);
        return scaler ? sbnn::mean_squared_error(scaler->s.inverse_y(pred), test->d.y)
                      : sbnn::mean_squared_error(pred, data.y);
      };
      out->full_test_mse = mse(c->c.params, data.x);
      out->refit_test_mse =
          mse(res.refit.params, data.mask_features(res.importance.selected).x);
    }
    if (refit) *refit = new sbnn_checkpoint{sbnn::Checkpoint{res.refit_model, res.refit.params}};
  });
}

sbnn_status sbnn_cv_threshold(const sbnn_model_spec* spec, const sbnn_dataset* train,
                              const sbnn_train_options* options, size_t folds,
                              const double* proportions, size_t count, uint64_t seed,
                              double* best, double* errors) {
  return guarded([&] {
    need(spec, "model spec");
    need(train, "dataset");
    need(options, "train options");
    need(proportions, "proportions");
    need(best, "output");
    const auto setup = to_setup(*spec);
    const auto res = sbnn::cv_threshold(setup.model_for(train->d.features()), train->d,
                                        to_config(*options), folds,
                                        std::span<const double>(proportions, count), seed);
    *best = res.best_proportion;
    if (errors) std::copy(res.mean_errors.begin(), res.mean_errors.end(), errors);
  });
}

sbnn_status sbnn_benchmark(const char* manifest_path, const sbnn_model_spec* spec,
                           const sbnn_train_options* options, double train_fraction,
                           size_t repeats, const double* droprates, size_t count, sbnn_rule rule,
                           const char* out_csv) {
  return guarded([&] {
    need(manifest_path, "manifest path");
    need(spec, "model spec");
    need(options, "train options");
    need(out_csv, "output path");
    sbnn::BenchmarkConfig cfg;
    cfg.setup = to_setup(*spec);
    cfg.setup.train = to_config(*options);
    cfg.train_fraction = train_fraction;
    cfg.repeats = repeats;
    cfg.seed = options->seed;
    cfg.rule = to_rule(rule);
    if (droprates && count > 0) cfg.droprates.assign(droprates, droprates + count);
    std::vector<sbnn::BenchmarkSummary> all;
    for (const auto& entry : sbnn::load_manifest(manifest_path)) {
      const auto data = sbnn::load_csv(entry.path, entry.schema);
      const auto res = sbnn::benchmark_dataset(entry.name, data, cfg);
      all.insert(all.end(), res.summary.begin(), res.summary.end());
    }
    std::ofstream f(out_csv);
    if (!f) sbnn::fail(sbnn::ErrorKind::io, std::string("cannot write '") + out_csv + "'");
    sbnn::write_benchmark_csv(f, all);
  });
}

sbnn_status sbnn_gradcheck(const sbnn_grad_setting* settings, size_t count, size_t draws,
                           uint64_t seed, const char* out_csv) {
  return guarded([&] {
    need(settings, "settings");
    need(out_csv, "output path");
    if (count == 0) sbnn::fail(sbnn::ErrorKind::config, "gradcheck needs at least one setting");
    std::vector<sbnn::GradSetting> grid;
    for (std::size_t k = 0; k < count; ++k) {
      if (!(settings[k].sigma > 0.0))
        sbnn::fail(sbnn::ErrorKind::config, "gradcheck sigma must be positive");
      grid.push_back({settings[k].m, settings[k].sigma, to_prior(settings[k].prior)});
    }
    const auto rows = sbnn::variance_comparison(grid, draws, seed);
    std::ofstream f(out_csv);
    if (!f) sbnn::fail(sbnn::ErrorKind::io, std::string("cannot write '") + out_csv + "'");
    sbnn::write_comparison_csv(f, rows);
  });
}

}  // extern "C"
