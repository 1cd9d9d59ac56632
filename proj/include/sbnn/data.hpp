#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sbnn/matrix.hpp"

namespace sbnn {

struct Dataset {
  Matrix x;                                // [n x p]
  std::vector<double> y;                   // response, or class indices
  std::vector<std::string> feature_names;  // length p
  std::string target_name = "y";
  std::vector<std::uint8_t> z_true;        // ground-truth active features, when known
  std::vector<double> beta;                // ground-truth effect sizes, when known

  std::size_t rows() const { return x.rows; }
  std::size_t features() const { return x.cols; }
  bool has_truth() const { return !z_true.empty(); }

  // Row counts agree and every entry is finite.
  void validate() const;
  Dataset subset(std::span<const std::size_t> rows) const;
  // Multiplies every column j by keep[j] (X diag(keep)).
  Dataset mask_features(std::span<const std::uint8_t> keep) const;
};

// y = (1 - alpha) x1 + alpha x2 + eps, all inputs iid N(0, 1).
Dataset gen_two_feature(double alpha_mix, std::size_t n, std::uint64_t seed);

// 1 - sum (y_i - c_i)^2 / sum y_i^2, where c_i is feature 2's contribution.
double relevance_I(std::span<const double> y, std::span<const double> x2_contribution);

enum class Link { linear, nonlinear };

// f(x) = x, or f(x) = e^|x| - 2x + sin(2 pi x)
double link_value(Link link, double x);

struct SyntheticSpec {
  std::size_t n = 2000;
  std::size_t features = 100;
  double alpha = 2.0;       // beta_j = j / alpha
  double pi_active = 0.2;   // P(Z_j = 1)
  Link link = Link::nonlinear;
  std::uint64_t seed = 1;
};

// y_i = sum_j f(X_ij) beta_j Z_j + eps_i with X, eps iid N(0,1), Z_j ~ Bernoulli(pi_active).
Dataset gen_sparse_regression(const SyntheticSpec& spec);

// Per-column affine standardization fitted on training rows only.
struct Standardizer {
  std::vector<double> x_mean, x_std;
  double y_mean = 0.0, y_std = 1.0;
  bool standardize_y = true;

  // Zero-variance columns get std 1; a warning is appended for each.
  static Standardizer fit(const Dataset& train, bool standardize_y = true,
                          std::vector<std::string>* warnings = nullptr);
  Dataset apply(const Dataset& d) const;
  Dataset inverse(const Dataset& d) const;
  double inverse_y(double v) const { return standardize_y ? v * y_std + y_mean : v; }
  std::vector<double> inverse_y(std::span<const double> v) const;
};

// Seeded shuffle into disjoint train/test parts; train gets round(n * fraction) rows.
std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, std::uint64_t seed);
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double train_fraction, std::uint64_t seed);

// Seeded partition of 0..n-1 into `folds` near-equal groups.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, std::size_t folds,
                                                    std::uint64_t seed);

struct CsvSchema {
  std::string target_column;
  std::size_t expected_rows = 0;      // 0 = unchecked
  std::size_t expected_features = 0;  // 0 = unchecked
};

// Comma-separated, '.' decimal, header row first. Every non-target column is a feature.
Dataset load_csv(const std::string& path, const CsvSchema& schema);
void save_csv(const std::string& path, const Dataset& d);

struct ManifestEntry {
  std::string name;
  std::string path;  // resolved relative to the manifest's directory
  CsvSchema schema;
};

// CSV with header: name,path,target,rows,features
std::vector<ManifestEntry> load_manifest(const std::string& path);

double mean_squared_error(std::span<const double> a, std::span<const double> b);
double root_mean_squared_error(std::span<const double> a, std::span<const double> b);
double pearson_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace sbnn
