#include "sbnn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "sbnn/error.hpp"
#include "parallel.hpp"

namespace sbnn {

std::vector<double> default_droprates() {
  return {0.0, 0.10, 0.20, 0.25, 0.50, 0.75, 0.80, 0.90, 0.95};
}

std::vector<PruneCurveRow> pruning_curve(const Model& model, const VariationalParams& vp,
                                         const Dataset& test, RankRule rule,
                                         std::span<const double> droprates,
                                         const Standardizer* scale) {
  std::vector<double> rates(droprates.begin(), droprates.end());
  std::sort(rates.begin(), rates.end());
  std::vector<double> truth = test.y;
  if (scale) truth = scale->inverse_y(test.y);

  std::vector<PruneCurveRow> rows(rates.size());
  parallel_for(rates.size(), [&](std::size_t k) {
    const auto [mask, pruned] = prune(vp, rule, rates[k]);
    auto pred = predict_response(model.topology, pruned, test.x);
    if (scale) pred = scale->inverse_y(pred);
    PruneCurveRow& row = rows[k];
    row.droprate = rates[k];
    row.sparsity = sparsity(mask);
    row.test_mse = mean_squared_error(pred, truth);
    row.test_rmse = std::sqrt(row.test_mse);
  });
  return rows;
}

void write_prune_csv(std::ostream& out, std::span<const PruneCurveRow> rows) {
  out << "# schema_version=1\n"
      << "droprate,sparsity,test_mse,test_rmse\n"
      << std::setprecision(10);
  for (const auto& r : rows)
    out << r.droprate << ',' << r.sparsity << ',' << r.test_mse << ',' << r.test_rmse << '\n';
}

Model Setup::model_for(std::size_t inputs) const {
  Model m;
  m.topology = make_topology(inputs, hidden, 1, activation, OutputHead::identity);
  m.prior = prior;
  m.noise_variance = noise_variance;
  return m;
}

BenchmarkResult benchmark_dataset(const std::string& name, const Dataset& data,
                                  const BenchmarkConfig& config) {
  require(config.repeats >= 1, "benchmark needs at least one repeat");
  BenchmarkResult res;
  const auto rates = [&] {
    std::vector<double> r = config.droprates;
    std::sort(r.begin(), r.end());
    return r;
  }();
  std::vector<std::vector<PruneCurveRow>> curves(config.repeats);
  parallel_for(config.repeats, [&](std::size_t rep) {
    const std::uint64_t seed = config.seed + rep;
    const auto [raw_train, raw_test] = split(data, config.train_fraction, seed);
    const auto scale = Standardizer::fit(raw_train, true);
    const Dataset train_set = scale.apply(raw_train);
    const Dataset test_set = scale.apply(raw_test);
    const Model model = config.setup.model_for(data.features());
    TrainConfig cfg = config.setup.train;
    cfg.seed = seed;
    const auto report = train(model, train_set, cfg);
    curves[rep] = pruning_curve(model, report.params, test_set, config.rule, rates, &scale);
  });
  std::vector<std::vector<double>> per_rate(rates.size());
  for (std::size_t rep = 0; rep < config.repeats; ++rep) {
    const auto& curve = curves[rep];
    for (std::size_t k = 0; k < curve.size(); ++k) {
      res.rows.push_back({name, rep, config.seed + rep, curve[k].droprate, curve[k].sparsity,
                          curve[k].test_rmse});
      per_rate[k].push_back(curve[k].test_rmse);
    }
  }
  for (std::size_t k = 0; k < rates.size(); ++k) {
    const auto& v = per_rate[k];
    double mean = 0.0;
    for (double x : v) mean += x / double(v.size());
    double se = 0.0;
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      se = std::sqrt(ss / double(v.size() - 1) / double(v.size()));
    }
    res.summary.push_back({name, config.seed, rates[k], mean, se, v.size()});
  }
  return res;
}

void write_benchmark_csv(std::ostream& out, std::span<const BenchmarkSummary> rows) {
  out << "# schema_version=1\n"
      << "dataset,seed,repeats,droprate,mean_rmse,std_error\n"
      << std::setprecision(10);
  for (const auto& r : rows)
    out << r.dataset << ',' << r.seed << ',' << r.repeats << ',' << r.droprate << ','
        << r.mean_rmse << ',' << r.std_error << '\n';
}

RelevanceStudy run_relevance_study(std::span<const double> alphas, std::size_t n,
                                   const Setup& setup, std::uint64_t seed) {
  RelevanceStudy st;
  const std::size_t count = alphas.size();
  st.alphas.assign(alphas.begin(), alphas.end());
  st.relevance.resize(count);
  st.psi1.resize(count);
  st.psi2.resize(count);
  parallel_for(count, [&](std::size_t k) {
    const double a = alphas[k];
    const Dataset d = gen_two_feature(a, n, seed + k);
    std::vector<double> contrib(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) contrib[i] = a * d.x(i, 1);
    const auto scale = Standardizer::fit(d, true);
    const Model model = setup.model_for(2);
    TrainConfig cfg = setup.train;
    cfg.seed = seed + k;
    const auto report = train(model, scale.apply(d), cfg);
    const auto psi = feature_importance_psi(model.topology, report.params);
    st.relevance[k] = relevance_I(d.y, contrib);
    st.psi1[k] = psi[0];
    st.psi2[k] = psi[1];
  });
  if (st.alphas.size() >= 2) {
    st.corr_psi1 = pearson_correlation(st.relevance, st.psi1);
    st.corr_psi2 = pearson_correlation(st.relevance, st.psi2);
  }
  return st;
}

EffectSizeStudy run_effect_size_study(std::span<const double> alphas, std::size_t features,
                                      std::size_t n, Link link, const Setup& setup,
                                      std::uint64_t seed) {
  EffectSizeStudy st;
  st.alphas.assign(alphas.begin(), alphas.end());
  st.correlations.resize(alphas.size());
  parallel_for(alphas.size(), [&](std::size_t k) {
    SyntheticSpec spec;
    spec.n = n;
    spec.features = features;
    spec.alpha = alphas[k];
    spec.pi_active = 1.0;
    spec.link = link;
    spec.seed = seed + k;
    const Dataset d = gen_sparse_regression(spec);
    const auto scale = Standardizer::fit(d, true);
    const Model model = setup.model_for(features);
    TrainConfig cfg = setup.train;
    cfg.seed = seed + k;
    const auto report = train(model, scale.apply(d), cfg);
    const auto phi = feature_importance_phi(feature_importance_psi(model.topology, report.params));
    st.correlations[k] = pearson_correlation(phi, d.beta);
  });
  return st;
}

namespace {

struct Prepared {
  Dataset raw_test;
  Dataset train, test;  // standardized
  Standardizer scale;
  double true_proportion = 0.0;
};

Prepared prepare(const SyntheticSpec& spec, double train_fraction) {
  const Dataset d = gen_sparse_regression(spec);
  auto [raw_train, raw_test] = split(d, train_fraction, spec.seed);
  Prepared p;
  p.scale = Standardizer::fit(raw_train, true);
  p.train = p.scale.apply(raw_train);
  p.test = p.scale.apply(raw_test);
  p.raw_test = std::move(raw_test);
  double active = 0.0;
  for (auto z : d.z_true) active += z;
  p.true_proportion = active / double(d.z_true.size());
  return p;
}

double test_mse(const Model& model, const VariationalParams& vp, const Prepared& p,
                std::span<const std::uint8_t> keep) {
  const Matrix x = keep.empty() ? p.test.x : p.test.mask_features(keep).x;
  const auto pred = p.scale.inverse_y(predict_response(model.topology, vp, x));
  return mean_squared_error(pred, p.raw_test.y);
}

SelectionStudy select_and_refit(const Prepared& p, double keep_proportion, const Setup& setup) {
  const Model model = setup.model_for(p.train.features());
  TrainConfig cfg = setup.train;
  const auto full = train(model, p.train, cfg);
  SelectionStudy st;
  st.true_proportion = p.true_proportion;
  st.keep_proportion = keep_proportion;
  st.full_test_mse = test_mse(model, full.params, p, {});
  if (keep_proportion >= 1.0) {
    st.accuracy = selection_accuracy(p.train.z_true, std::vector<std::uint8_t>(
                                                         p.train.features(), 1));
    st.refit_test_mse = st.full_test_mse;
    return st;
  }
  const auto out = variable_selection(model, full.params, p.train, 1.0 - keep_proportion, cfg);
  st.accuracy = out.accuracy;
  st.refit_test_mse = test_mse(model, out.refit.params, p, out.importance.selected);
  return st;
}

}  // namespace

SelectionStudy run_selection_study(const SyntheticSpec& spec, double keep_proportion,
                                   const Setup& setup, double train_fraction) {
  require(keep_proportion > 0.0 && keep_proportion <= 1.0, "keep proportion must lie in (0, 1]");
  return select_and_refit(prepare(spec, train_fraction), keep_proportion, setup);
}

SelectionStudy run_cv_selection_study(const SyntheticSpec& spec, std::size_t folds,
                                      std::span<const double> grid, const Setup& setup,
                                      const TrainConfig& cv_train, double train_fraction) {
  const Prepared p = prepare(spec, train_fraction);
  const Model model = setup.model_for(p.train.features());
  const auto cv = cv_threshold(model, p.train, cv_train, folds, grid, spec.seed);
  auto st = select_and_refit(p, cv.best_proportion, setup);
  st.cv_errors = cv.mean_errors;
  return st;
}

std::vector<PruneCurveRow> run_pruning_study(const SyntheticSpec& spec, const Setup& setup,
                                             std::span<const double> droprates,
                                             double train_fraction) {
  const Prepared p = prepare(spec, train_fraction);
  const Model model = setup.model_for(p.train.features());
  const auto report = train(model, p.train, setup.train);
  return pruning_curve(model, report.params, p.test, RankRule::inclusion_p, droprates, &p.scale);
}

}  // namespace sbnn
