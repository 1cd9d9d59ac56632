#include "sbnn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "sbnn/error.hpp"

namespace sbnn {

void Dataset::validate() const {
  if (y.size() != x.rows)
    fail(ErrorKind::invalid_argument, "dataset has " + std::to_string(x.rows) +
                                          " feature rows but " + std::to_string(y.size()) +
                                          " responses");
  if (!feature_names.empty() && feature_names.size() != x.cols)
    fail(ErrorKind::invalid_argument, "feature name count does not match column count");
  for (double v : x.data)
    if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "dataset contains non-finite features");
  for (double v : y)
    if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "dataset contains non-finite responses");
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset d;
  d.x = Matrix(rows.size(), x.cols);
  d.y.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r] < x.rows, "subset row index out of range");
    std::copy_n(x.row(rows[r]).begin(), x.cols, d.x.row(r).begin());
    d.y[r] = y[rows[r]];
  }
  d.feature_names = feature_names;
  d.target_name = target_name;
  d.z_true = z_true;
  d.beta = beta;
  return d;
}

Dataset Dataset::mask_features(std::span<const std::uint8_t> keep) const {
  require(keep.size() == x.cols, "feature mask length does not match column count");
  Dataset d = *this;
  for (std::size_t r = 0; r < d.x.rows; ++r)
    for (std::size_t c = 0; c < d.x.cols; ++c)
      if (!keep[c]) d.x(r, c) = 0.0;
  return d;
}

namespace {

std::vector<std::string> numbered_names(std::size_t p) {
  std::vector<std::string> names(p);
  for (std::size_t j = 0; j < p; ++j) names[j] = "x" + std::to_string(j + 1);
  return names;
}

}  // namespace

Dataset gen_two_feature(double alpha_mix, std::size_t n, std::uint64_t seed) {
  require(alpha_mix >= 0.0 && alpha_mix <= 1.0, "alpha_mix must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Dataset d;
  d.x = Matrix(n, 2);
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = normal(rng), x2 = normal(rng), e = normal(rng);
    d.x(i, 0) = x1;
    d.x(i, 1) = x2;
    d.y[i] = (1.0 - alpha_mix) * x1 + alpha_mix * x2 + e;
  }
  d.feature_names = numbered_names(2);
  d.beta = {1.0 - alpha_mix, alpha_mix};
  return d;
}

double relevance_I(std::span<const double> y, std::span<const double> x2_contribution) {
  require(y.size() == x2_contribution.size(), "relevance_I inputs differ in length");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - x2_contribution[i];
    num += r * r;
    den += y[i] * y[i];
  }
  require(den > 0.0, "relevance_I needs a nonzero response");
  return 1.0 - num / den;
}

double link_value(Link link, double x) {
  if (link == Link::linear) return x;
  return std::exp(std::abs(x)) - 2.0 * x + std::sin(2.0 * std::numbers::pi * x);
}

Dataset gen_sparse_regression(const SyntheticSpec& spec) {
  require(spec.alpha > 0.0, "alpha must be positive");
  require(spec.pi_active >= 0.0 && spec.pi_active <= 1.0, "pi_active must lie in [0, 1]");
  require(spec.features >= 1 && spec.n >= 1, "synthetic dataset needs n >= 1 and D >= 1");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution active(spec.pi_active);

  Dataset d;
  const std::size_t p = spec.features;
  d.z_true.resize(p);
  d.beta.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    d.z_true[j] = active(rng) ? 1 : 0;
    d.beta[j] = static_cast<double>(j + 1) / spec.alpha;
  }
  d.x = Matrix(spec.n, p);
  d.y.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    double yi = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double v = normal(rng);
      d.x(i, j) = v;
      if (d.z_true[j]) yi += link_value(spec.link, v) * d.beta[j];
    }
    d.y[i] = yi + normal(rng);
  }
  d.feature_names = numbered_names(p);
  return d;
}

Standardizer Standardizer::fit(const Dataset& train, bool standardize_y,
                               std::vector<std::string>* warnings) {
  require(train.rows() > 0, "cannot fit a standardizer on zero rows");
  Standardizer s;
  s.standardize_y = standardize_y;
  const std::size_t n = train.rows(), p = train.features();
  s.x_mean.assign(p, 0.0);
  s.x_std.assign(p, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) s.x_mean[c] += train.x(r, c);
  for (double& v : s.x_mean) v /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) {
      const double e = train.x(r, c) - s.x_mean[c];
      s.x_std[c] += e * e;
    }
  for (std::size_t c = 0; c < p; ++c) {
    s.x_std[c] = std::sqrt(s.x_std[c] / static_cast<double>(n));
    if (!(s.x_std[c] > 0.0)) {
      // constant column: leave it centred but unscaled
      s.x_std[c] = 1.0;
      if (warnings) warnings->push_back("feature " + std::to_string(c) + " has zero variance");
    }
  }
  if (standardize_y) {
    s.y_mean = std::accumulate(train.y.begin(), train.y.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : train.y) ss += (v - s.y_mean) * (v - s.y_mean);
    s.y_std = std::sqrt(ss / static_cast<double>(n));
    if (!(s.y_std > 0.0)) {
      s.y_std = 1.0;
      if (warnings) warnings->push_back("response has zero variance");
    }
  }
  return s;
}

Dataset Standardizer::apply(const Dataset& d) const {
  require(d.features() == x_mean.size(), "standardizer fitted on a different feature count");
  Dataset out = d;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.features(); ++c)
      out.x(r, c) = (out.x(r, c) - x_mean[c]) / x_std[c];
  if (standardize_y)
    for (double& v : out.y) v = (v - y_mean) / y_std;
  return out;
}

Dataset Standardizer::inverse(const Dataset& d) const {
  require(d.features() == x_mean.size(), "standardizer fitted on a different feature count");
  Dataset out = d;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.features(); ++c)
      out.x(r, c) = out.x(r, c) * x_std[c] + x_mean[c];
  for (double& v : out.y) v = inverse_y(v);
  return out;
}

std::vector<double> Standardizer::inverse_y(std::span<const double> v) const {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = inverse_y(v[i]);
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double train_fraction, std::uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction < 1.0, "train fraction must lie in (0, 1)");
  require(n >= 2, "splitting needs at least two rows");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, std::uint64_t seed) {
  auto [train, test] = split_indices(d.rows(), train_fraction, seed);
  return {d.subset(train), d.subset(test)};
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, std::size_t folds,
                                                    std::uint64_t seed) {
  require(folds >= 2, "cross-validation needs at least two folds");
  require(n >= folds, "dataset has fewer rows (" + std::to_string(n) + ") than folds (" +
                          std::to_string(folds) + ")");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t i = 0; i < n; ++i) out[i % folds].push_back(idx[i]);
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) fields.push_back(cur);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* b = t.data();
  const char* e = t.data() + t.size();
  if (*b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e && std::isfinite(out);
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open CSV file '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    header = split_fields(line);
    break;
  }
  if (header.empty()) fail(ErrorKind::io, "CSV file '" + path + "' has no header row");
  for (auto& h : header) h = trim(h);

  std::size_t target = header.size();
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == schema.target_column) target = c;
  if (target == header.size())
    fail(ErrorKind::config, "CSV file '" + path + "' has no target column '" +
                                schema.target_column + "'");

  Dataset d;
  d.target_name = schema.target_column;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != target) d.feature_names.push_back(header[c]);
  const std::size_t p = header.size() - 1;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      fail(ErrorKind::io, path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " fields, found " +
                              std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v))
        fail(ErrorKind::io, path + ":" + std::to_string(line_no) + ": column '" + header[c] +
                                "' is not a finite number: '" + trim(fields[c]) + "'");
      if (c == target)
        d.y.push_back(v);
      else
        values.push_back(v);
    }
  }
  d.x.rows = d.y.size();
  d.x.cols = p;
  d.x.data = std::move(values);
  if (schema.expected_rows && d.rows() != schema.expected_rows)
    fail(ErrorKind::config, "CSV file '" + path + "' has " + std::to_string(d.rows()) +
                                " rows, manifest expects " + std::to_string(schema.expected_rows));
  if (schema.expected_features && p != schema.expected_features)
    fail(ErrorKind::config, "CSV file '" + path + "' has " + std::to_string(p) +
                                " features, manifest expects " +
                                std::to_string(schema.expected_features));
  d.validate();
  return d;
}

void save_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write CSV file '" + path + "'");
  out.precision(17);
  for (std::size_t c = 0; c < d.features(); ++c)
    out << (d.feature_names.empty() ? "x" + std::to_string(c + 1) : d.feature_names[c]) << ',';
  out << d.target_name << '\n';
  for (std::size_t r = 0; r < d.rows(); ++r) {
    for (std::size_t c = 0; c < d.features(); ++c) out << d.x(r, c) << ',';
    out << d.y[r] << '\n';
  }
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open manifest '" + path + "'");
  const auto base = std::filesystem::path(path).parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split_fields(t);
    for (auto& f : fields) f = trim(f);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 3 || fields[0] != "name" || fields[1] != "path" || fields[2] != "target")
        fail(ErrorKind::config, path + ": manifest header must start with name,path,target");
      continue;
    }
    if (fields.size() < 3)
      fail(ErrorKind::config, path + ":" + std::to_string(line_no) + ": expected at least 3 fields");
    ManifestEntry e;
    e.name = fields[0];
    std::filesystem::path p(fields[1]);
    e.path = p.is_absolute() ? p.string() : (base / p).string();
    e.schema.target_column = fields[2];
    if (fields.size() > 3 && !fields[3].empty()) e.schema.expected_rows = std::stoull(fields[3]);
    if (fields.size() > 4 && !fields[4].empty()) e.schema.expected_features = std::stoull(fields[4]);
    entries.push_back(std::move(e));
  }
  return entries;
}

double mean_squared_error(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && !a.empty(), "error metric needs equal nonempty vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double root_mean_squared_error(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(mean_squared_error(a, b));
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && a.size() >= 2, "correlation needs two equal-length vectors");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace sbnn
