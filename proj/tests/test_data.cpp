#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "oracles.hpp"
#include "sbnn/data.hpp"
#include "sbnn/error.hpp"

using namespace sbnn;

namespace {

const std::string kSource = SBNN_SOURCE_DIR;

std::vector<std::vector<double>> rows_with_intercept(const Matrix& x) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < x.rows; ++i) {
    std::vector<double> r{1.0};
    for (std::size_t j = 0; j < x.cols; ++j) r.push_back(x(i, j));
    rows.push_back(r);
  }
  return rows;
}

std::vector<double> residuals(const Dataset& d, const std::vector<double>& beta) {
  std::vector<double> r;
  const auto rows = rows_with_intercept(d.x);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double fit = 0;
    for (std::size_t j = 0; j < beta.size(); ++j) fit += beta[j] * rows[i][j];
    r.push_back(d.y[i] - fit);
  }
  return r;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::invalid_argument;
}

}  // namespace

TEST_CASE("two-feature generator") {
  for (double alpha : {0.0, 0.3, 1.0}) {
    const Dataset d = gen_two_feature(alpha, 20000, 5);
    CHECK_NOTHROW(d.validate());
    const auto beta = oracle::ols(rows_with_intercept(d.x), d.y);
    CHECK(std::abs(beta[0]) < 0.05);
    CHECK(std::abs(beta[1] - (1 - alpha)) < 0.05);
    CHECK(std::abs(beta[2] - alpha) < 0.05);
    CHECK(std::abs(oracle::variance(residuals(d, beta)) - 1.0) < 0.05);
    CHECK(oracle::variance(d.y) ==
          doctest::Approx((1 - alpha) * (1 - alpha) + alpha * alpha + 1).epsilon(0.05));
  }
  CHECK(gen_two_feature(0.4, 50, 3).y == gen_two_feature(0.4, 50, 3).y);
  CHECK(gen_two_feature(0.4, 50, 3).y != gen_two_feature(0.4, 50, 4).y);
  CHECK_THROWS_AS(gen_two_feature(1.5, 10, 1), Error);
}

TEST_CASE("relevance_I") {
  const std::vector<double> y{1.0, -2.0, 3.0};
  CHECK(relevance_I(y, y) == 1.0);
  CHECK(relevance_I(y, std::vector<double>{0, 0, 0}) == 0.0);
  const std::vector<double> c{0.5, -1.0, 1.0};
  const double want = 1.0 - (0.25 + 1.0 + 4.0) / (1.0 + 4.0 + 9.0);
  CHECK(relevance_I(y, c) == doctest::Approx(want));
  CHECK_THROWS_AS(relevance_I(y, std::span<const double>(c).first(2)), Error);
}

TEST_CASE("link values") {
  CHECK(link_value(Link::nonlinear, 0.0) == 1.0);
  CHECK(link_value(Link::linear, -1.7) == -1.7);
  CHECK(link_value(Link::nonlinear, 0.25) ==
        doctest::Approx(std::exp(0.25) - 0.5 + 1.0).epsilon(1e-14));
}

TEST_CASE("sparse regression generator") {
  SyntheticSpec spec;
  spec.n = 5000;
  spec.features = 10;
  spec.alpha = 2.0;
  spec.pi_active = 0.5;
  spec.link = Link::linear;
  spec.seed = 3;
  const Dataset d = gen_sparse_regression(spec);
  REQUIRE(d.has_truth());
  CHECK(d.rows() == 5000);
  CHECK(d.features() == 10);
  const auto beta = oracle::ols(rows_with_intercept(d.x), d.y);
  for (std::size_t j = 0; j < 10; ++j) {
    CHECK(d.beta[j] == doctest::Approx((j + 1) / 2.0));
    const double want = d.z_true[j] ? d.beta[j] : 0.0;
    CHECK(std::abs(beta[j + 1] - want) < 0.06);
  }
  CHECK(std::abs(oracle::variance(residuals(d, beta)) - 1.0) < 0.06);

  spec.pi_active = 0.0;
  spec.link = Link::nonlinear;
  const Dataset noise = gen_sparse_regression(spec);
  for (auto z : noise.z_true) CHECK(z == 0);
  CHECK(std::abs(oracle::variance(noise.y) - 1.0) < 0.06);
  CHECK(std::abs(oracle::mean(noise.y)) < 0.06);

  // Inclusion frequency over many features.
  spec.features = 4000;
  spec.n = 1;
  spec.pi_active = 0.2;
  const Dataset wide = gen_sparse_regression(spec);
  double share = 0;
  for (auto z : wide.z_true) share += z;
  CHECK(std::abs(share / 4000 - 0.2) < 4 * std::sqrt(0.2 * 0.8 / 4000));
}

TEST_CASE("standardizer") {
  oracle::Gen g(8);
  Dataset d;
  d.x = Matrix(50, 3);
  for (std::size_t i = 0; i < 50; ++i) {
    d.x(i, 0) = g.normal(5.0, 3.0);
    d.x(i, 1) = 2.5;  // constant
    d.x(i, 2) = g.uniform(-10, 0);
    d.y.push_back(g.normal(100.0, 20.0));
  }
  d.feature_names = {"a", "b", "c"};
  std::vector<std::string> warnings;
  const auto s = Standardizer::fit(d, true, &warnings);
  CHECK(warnings.size() == 1);
  CHECK(s.x_std[1] == 1.0);
  const Dataset z = s.apply(d);
  for (std::size_t c : {0u, 2u}) {
    std::vector<double> col;
    for (std::size_t i = 0; i < 50; ++i) col.push_back(z.x(i, c));
    CHECK(std::abs(oracle::mean(col)) < 1e-12);
    CHECK(oracle::variance(col) * 49 / 50 == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < 50; ++i) CHECK(z.x(i, 1) == 0.0);
  const Dataset back = s.inverse(z);
  for (std::size_t k = 0; k < d.x.data.size(); ++k)
    CHECK(back.x.data[k] == doctest::Approx(d.x.data[k]).epsilon(1e-12));
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(back.y[i] == doctest::Approx(d.y[i]).epsilon(1e-12));
    CHECK(s.inverse_y(z.y[i]) == doctest::Approx(d.y[i]).epsilon(1e-12));
  }

  const auto keep_y = Standardizer::fit(d, false);
  CHECK(keep_y.apply(d).y == d.y);
}

TEST_CASE("split") {
  const Dataset d = gen_two_feature(0.5, 101, 1);
  auto [train, test] = split(d, 0.9, 7);
  CHECK(train.rows() == 91);
  CHECK(test.rows() == 10);
  auto [a, b] = split_indices(101, 0.9, 7);
  std::set<std::size_t> all(a.begin(), a.end());
  for (auto i : b) CHECK(all.insert(i).second);
  CHECK(all.size() == 101);
  CHECK(split_indices(101, 0.9, 7) == split_indices(101, 0.9, 7));
  CHECK(split_indices(101, 0.9, 7).first != split_indices(101, 0.9, 8).first);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(train.y[k] == d.y[a[k]]);
  CHECK_THROWS_AS(split_indices(10, 1.0, 1), Error);
}

TEST_CASE("kfold") {
  for (std::size_t n : {10u, 37u, 2000u}) {
    const auto folds = kfold_indices(n, 10, 3);
    REQUIRE(folds.size() == 10);
    std::set<std::size_t> seen;
    std::size_t lo = n, hi = 0;
    for (const auto& f : folds) {
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
      for (auto i : f) CHECK(seen.insert(i).second);
    }
    CHECK(seen.size() == n);
    CHECK(hi - lo <= 1);
  }
  CHECK_THROWS_AS(kfold_indices(5, 10, 1), Error);
  CHECK_THROWS_AS(kfold_indices(5, 1, 1), Error);
}

TEST_CASE("csv loading") {
  const std::string path = "test_data_tmp.csv";
  write_file(path, "a,b,t\n1,2,3\n4,5,6\n");
  CsvSchema schema{"t", 2, 2};
  const Dataset d = load_csv(path, schema);
  CHECK(d.rows() == 2);
  CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(d.target_name == "t");
  CHECK(d.y == std::vector<double>{3, 6});
  CHECK(d.x.data == std::vector<double>{1, 2, 4, 5});

  save_csv("test_data_tmp2.csv", d);
  const Dataset again = load_csv("test_data_tmp2.csv", {"t", 0, 0});
  CHECK(again.x.data == d.x.data);
  CHECK(again.y == d.y);
  std::remove("test_data_tmp2.csv");

  CHECK(kind_of([&] { load_csv("/nonexistent.csv", schema); }) == ErrorKind::io);
  CHECK(kind_of([&] { load_csv(path, {"missing", 0, 0}); }) == ErrorKind::config);
  CHECK(kind_of([&] { load_csv(path, {"t", 3, 0}); }) == ErrorKind::config);
  CHECK(kind_of([&] { load_csv(path, {"t", 0, 5}); }) == ErrorKind::config);
  write_file(path, "a,b,t\n1,x,3\n");
  CHECK(kind_of([&] { load_csv(path, {"t", 0, 0}); }) == ErrorKind::io);
  write_file(path, "a,b,t\n1,2\n");
  CHECK(kind_of([&] { load_csv(path, {"t", 0, 0}); }) == ErrorKind::io);
  std::remove(path.c_str());
}

TEST_CASE("bundled Boston data") {
  const auto entries = load_manifest(kSource + "/data/manifest.csv");
  REQUIRE(entries.size() >= 1);
  const auto it = std::find_if(entries.begin(), entries.end(),
                               [](const ManifestEntry& e) { return e.name == "boston"; });
  REQUIRE(it != entries.end());
  const Dataset d = load_csv(it->path, it->schema);
  CHECK(d.rows() == 506);
  CHECK(d.features() == 13);
  CHECK(d.target_name == "medv");
  CHECK(d.y.front() == 24.0);
  CHECK_NOTHROW(d.validate());
}

TEST_CASE("subset and feature masks") {
  const Dataset d = gen_two_feature(0.5, 20, 2);
  const std::vector<std::size_t> rows{3, 0, 7};
  const Dataset s = d.subset(rows);
  CHECK(s.y == std::vector<double>{d.y[3], d.y[0], d.y[7]});
  CHECK(s.x(0, 1) == d.x(3, 1));
  const Dataset m = d.mask_features(std::vector<std::uint8_t>{1, 0});
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(m.x(i, 0) == d.x(i, 0));
    CHECK(m.x(i, 1) == 0.0);
  }
  Dataset bad = d;
  bad.y.pop_back();
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = d;
  bad.x.data[0] = std::nan("");
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("error metrics") {
  oracle::Gen g(9);
  const auto a = g.normals(200), b = g.normals(200);
  long double se = 0, sab = 0, saa = 0, sbb = 0;
  const double ma = oracle::mean(a), mb = oracle::mean(b);
  for (std::size_t i = 0; i < 200; ++i) {
    se += (a[i] - b[i]) * (a[i] - b[i]);
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  CHECK(mean_squared_error(a, b) == doctest::Approx(double(se / 200)).epsilon(1e-12));
  CHECK(root_mean_squared_error(a, b) == doctest::Approx(std::sqrt(double(se / 200))));
  CHECK(pearson_correlation(a, b) ==
        doctest::Approx(double(sab / std::sqrt(saa * sbb))).epsilon(1e-12));
  CHECK(pearson_correlation(a, a) == doctest::Approx(1.0));
}
