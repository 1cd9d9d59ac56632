#include "sbnn/compress.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>

#include "sbnn/error.hpp"
#include "parallel.hpp"

namespace sbnn {

const char* rule_name(RankRule rule) {
  switch (rule) {
    case RankRule::inclusion_p: return "p";
    case RankRule::second_moment: return "m2";
    case RankRule::snr: return "snr";
  }
  return "?";
}

RankRule parse_rule(const std::string& text) {
  if (text == "p" || text == "inclusion_p") return RankRule::inclusion_p;
  if (text == "m2" || text == "second_moment") return RankRule::second_moment;
  if (text == "snr") return RankRule::snr;
  fail(ErrorKind::config, "unknown ranking rule '" + text + "' (expected p, m2 or snr)");
}

std::vector<double> rank_score(const VariationalParams& vp, RankRule rule) {
  vp.validate();
  std::vector<double> s(vp.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double sigma = vp.sigma(i);
    switch (rule) {
      case RankRule::inclusion_p: s[i] = vp.p[i]; break;
      case RankRule::second_moment: s[i] = vp.m[i] * vp.m[i] + sigma * sigma; break;
      case RankRule::snr: s[i] = std::abs(vp.m[i]) / sigma; break;
    }
    if (!vp.active(i)) s[i] = -std::numeric_limits<double>::infinity();
  }
  return s;
}

std::vector<std::size_t> drop_order(const VariationalParams& vp, RankRule rule) {
  const std::vector<double> score = rank_score(vp, rule);
  std::vector<double> tie;
  if (rule == RankRule::inclusion_p) tie = rank_score(vp, RankRule::second_moment);
  std::vector<std::size_t> idx(score.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] < score[b];
    if (!tie.empty() && tie[a] != tie[b]) return tie[a] < tie[b];
    return false;
  });
  return idx;
}

std::pair<PruneMask, VariationalParams> prune(const VariationalParams& vp, RankRule rule,
                                              double droprate) {
  require(droprate >= 0.0 && droprate < 1.0, "droprate must lie in [0, 1)");
  const std::size_t total = vp.size();
  const auto drop = static_cast<std::size_t>(std::llround(droprate * static_cast<double>(total)));
  PruneMask mask;
  mask.rule = rule;
  mask.droprate = droprate;
  mask.keep.assign(total, 1);
  const auto order = drop_order(vp, rule);
  for (std::size_t k = 0; k < drop && k < total; ++k) mask.keep[order[k]] = 0;
  // parameters pruned earlier stay pruned
  for (std::size_t i = 0; i < total; ++i)
    if (!vp.active(i)) mask.keep[i] = 0;

  VariationalParams out = vp;
  if (drop == 0 && vp.keep.empty()) return {std::move(mask), std::move(out)};
  out.keep = mask.keep;
  for (std::size_t i = 0; i < total; ++i)
    if (!mask.keep[i]) {
      out.m[i] = 0.0;
      out.p[i] = 0.0;
    }
  return {std::move(mask), std::move(out)};
}

double sparsity(const PruneMask& mask) {
  if (mask.keep.empty()) return 0.0;
  const auto kept = static_cast<double>(std::count(mask.keep.begin(), mask.keep.end(), 1));
  return 1.0 - kept / static_cast<double>(mask.keep.size());
}

namespace {
constexpr char kMaskMagic[8] = {'S', 'B', 'N', 'N', 'M', 'A', 'S', 'K'};
constexpr std::uint32_t kMaskVersion = 1;

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) fail(ErrorKind::io, "mask file is truncated");
  return v;
}
}  // namespace

// Layout: magic "SBNNMASK", u32 version, u32 order id, u32 rule, f64 droprate,
// u64 M, then M bytes (1 keep, 0 drop) in canonical parameter order.
void save_mask(const std::string& path, const PruneMask& mask) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write mask file '" + path + "'");
  out.write(kMaskMagic, sizeof kMaskMagic);
  put<std::uint32_t>(out, kMaskVersion);
  put<std::uint32_t>(out, kCanonicalOrderId);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(mask.rule));
  put<double>(out, mask.droprate);
  put<std::uint64_t>(out, mask.keep.size());
  out.write(reinterpret_cast<const char*>(mask.keep.data()),
            static_cast<std::streamsize>(mask.keep.size()));
}

PruneMask load_mask(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open mask file '" + path + "'");
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMaskMagic, sizeof magic) != 0)
    fail(ErrorKind::io, "not a mask file (bad magic)");
  if (get<std::uint32_t>(in) != kMaskVersion) fail(ErrorKind::io, "unsupported mask version");
  if (get<std::uint32_t>(in) != kCanonicalOrderId)
    fail(ErrorKind::io, "mask uses an unknown parameter order");
  PruneMask mask;
  const auto rule = get<std::uint32_t>(in);
  if (rule > 2) fail(ErrorKind::io, "mask has an unknown ranking rule");
  mask.rule = static_cast<RankRule>(rule);
  mask.droprate = get<double>(in);
  const auto n = get<std::uint64_t>(in);
  mask.keep.resize(n);
  in.read(reinterpret_cast<char*>(mask.keep.data()), static_cast<std::streamsize>(n));
  if (!in) fail(ErrorKind::io, "mask file is truncated");
  for (auto k : mask.keep)
    if (k > 1) fail(ErrorKind::io, "mask entries must be 0 or 1");
  return mask;
}

std::vector<double> feature_importance_psi(const Topology& topology, const VariationalParams& vp) {
  topology.validate();
  require(vp.size() == topology.param_count(), "variational state does not match topology");
  if (topology.outputs() != 1)
    fail(ErrorKind::invalid_argument,
         "feature importance is defined for single-output networks only (got " +
             std::to_string(topology.outputs()) + " outputs)");
  const std::size_t layers = topology.weight_layers();
  // v holds path-probability sums from each node of the current layer to the output.
  std::vector<double> v(1, 1.0);
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t n_in = topology.layer_sizes[l], n_out = topology.layer_sizes[l + 1];
    const double* p = vp.p.data() + topology.weight_offset(l);
    std::vector<double> next(n_in, 0.0);
    for (std::size_t i = 0; i < n_in; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_out; ++j) s += p[i * n_out + j] * v[j];
      next[i] = s;
    }
    v = std::move(next);
  }
  double paths = 1.0;
  for (std::size_t l = 1; l + 1 < topology.layer_sizes.size(); ++l)
    paths *= static_cast<double>(topology.layer_sizes[l]);
  for (double& x : v) x /= paths;
  return v;
}

std::vector<double> feature_importance_phi(std::span<const double> psi,
                                           std::vector<std::string>* warnings) {
  require(psi.size() >= 2, "phi needs at least two features");
  const auto [lo, hi] = std::minmax_element(psi.begin(), psi.end());
  std::vector<double> phi(psi.size(), 0.0);
  const double range = *hi - *lo;
  if (!(range > 0.0)) {
    if (warnings) warnings->push_back("feature importance psi is constant; phi set to zero");
    return phi;
  }
  for (std::size_t j = 0; j < psi.size(); ++j) phi[j] = (psi[j] - *lo) / range;
  return phi;
}

double quantile(std::span<const double> values, double q) {
  require(!values.empty(), "quantile of an empty sample");
  require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0, 1]");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

ImportanceReport select_by_quantile(std::vector<double> psi, double keep_quantile,
                                    std::vector<std::string>* warnings) {
  require(keep_quantile >= 0.0 && keep_quantile < 1.0, "keep quantile must lie in [0, 1)");
  ImportanceReport r;
  r.phi = feature_importance_phi(psi, warnings);
  r.psi = std::move(psi);
  r.threshold = quantile(r.phi, keep_quantile);
  r.selected.assign(r.phi.size(), 0);
  std::size_t kept = 0;
  for (std::size_t j = 0; j < r.phi.size(); ++j)
    if (r.phi[j] >= r.threshold) {
      r.selected[j] = 1;
      ++kept;
    }
  if (kept == 0) {
    const auto best = static_cast<std::size_t>(
        std::max_element(r.phi.begin(), r.phi.end()) - r.phi.begin());
    r.selected[best] = 1;
    if (warnings) warnings->push_back("threshold kept no features; keeping the largest-phi feature");
  }
  return r;
}

ImportanceReport importance_report(const Topology& topology, const VariationalParams& vp,
                                   double keep_quantile, std::vector<std::string>* warnings) {
  return select_by_quantile(feature_importance_psi(topology, vp), keep_quantile, warnings);
}

void write_importance_csv(const std::string& path, const ImportanceReport& report) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write importance CSV '" + path + "'");
  out.precision(17);
  out << "# schema_version=1\n";
  out << "feature_index,psi,phi,selected\n";
  for (std::size_t j = 0; j < report.psi.size(); ++j)
    out << j << ',' << report.psi[j] << ',' << report.phi[j] << ','
        << (report.selected.empty() ? 0 : int(report.selected[j])) << '\n';
}

double selection_accuracy(std::span<const std::uint8_t> z_true,
                          std::span<const std::uint8_t> z_hat) {
  require(z_true.size() == z_hat.size() && !z_true.empty(),
          "selection accuracy needs equal-length indicator vectors");
  std::size_t agree = 0;
  for (std::size_t j = 0; j < z_true.size(); ++j) agree += (z_true[j] != 0) == (z_hat[j] != 0);
  return static_cast<double>(agree) / static_cast<double>(z_true.size());
}

SelectionOutcome variable_selection(const Model& model, const VariationalParams& vp,
                                    const Dataset& data, double keep_quantile,
                                    const TrainConfig& retrain,
                                    std::vector<std::string>* warnings) {
  require(keep_quantile > 0.0 && keep_quantile < 1.0, "keep quantile must lie in (0, 1)");
  SelectionOutcome out;
  out.importance = importance_report(model.topology, vp, keep_quantile, warnings);
  const auto& sel = out.importance.selected;
  out.active_proportion = static_cast<double>(std::count(sel.begin(), sel.end(), 1)) /
                          static_cast<double>(sel.size());
  if (data.has_truth()) out.accuracy = selection_accuracy(data.z_true, sel);
  out.refit_model = model;
  out.refit = train(model, data.mask_features(sel), retrain);
  return out;
}

std::vector<double> default_cv_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 20; ++k) g.push_back(0.05 * k);
  return g;
}

CvResult cv_threshold(const Model& model, const Dataset& data, const TrainConfig& config,
                      std::size_t folds, std::span<const double> candidate_proportions,
                      std::uint64_t seed) {
  require(!candidate_proportions.empty(), "candidate grid is empty");
  for (double q : candidate_proportions)
    require(q > 0.0 && q <= 1.0, "candidate proportions must lie in (0, 1]");
  const auto parts = kfold_indices(data.rows(), folds, seed);

  CvResult res;
  res.proportions.assign(candidate_proportions.begin(), candidate_proportions.end());
  res.mean_errors.assign(res.proportions.size(), 0.0);
  if (res.proportions.size() == 1) {
    res.best_proportion = res.proportions.front();
    return res;
  }

  // One task per fold; each writes only its own row, merged in fold order.
  auto run_fold = [&](std::size_t f) {
    std::vector<std::size_t> train_rows;
    for (std::size_t g = 0; g < folds; ++g)
      if (g != f) train_rows.insert(train_rows.end(), parts[g].begin(), parts[g].end());
    std::sort(train_rows.begin(), train_rows.end());
    const Dataset tr = data.subset(train_rows);
    const Dataset va = data.subset(parts[f]);

    TrainConfig fold_cfg = config;
    fold_cfg.seed = config.seed + 1000003ULL * (f + 1);
    const TrainReport full = train(model, tr, fold_cfg);
    const auto psi = feature_importance_psi(model.topology, full.params);

    std::vector<double> errors(res.proportions.size());
    for (std::size_t c = 0; c < res.proportions.size(); ++c) {
      const double q = res.proportions[c];
      const ImportanceReport sel = select_by_quantile(psi, std::max(0.0, 1.0 - q));
      const bool all = std::all_of(sel.selected.begin(), sel.selected.end(),
                                   [](std::uint8_t k) { return k != 0; });
      std::vector<double> pred;
      if (all) {
        pred = predict_response(model.topology, full.params, va.x);
      } else {
        const TrainReport refit = train(model, tr.mask_features(sel.selected), fold_cfg);
        pred = predict_response(model.topology, refit.params, va.mask_features(sel.selected).x);
      }
      errors[c] = mean_squared_error(pred, va.y);
    }
    return errors;
  };

  std::vector<std::vector<double>> fold_errors(folds);
  parallel_for(folds, [&](std::size_t f) { fold_errors[f] = run_fold(f); });
  for (std::size_t f = 0; f < folds; ++f)
    for (std::size_t c = 0; c < res.proportions.size(); ++c)
      res.mean_errors[c] += fold_errors[f][c] / static_cast<double>(folds);
  std::size_t best = 0;
  for (std::size_t c = 1; c < res.proportions.size(); ++c) {
    const bool better = res.mean_errors[c] < res.mean_errors[best] ||
                        (res.mean_errors[c] == res.mean_errors[best] &&
                         res.proportions[c] < res.proportions[best]);
    if (better) best = c;
  }
  res.best_proportion = res.proportions[best];
  return res;
}

}  // namespace sbnn
