#pragma once

// End-to-end pipelines: pruning curves, the benchmark harness over CSV
// datasets, and the simulated feature-selection studies.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sbnn/compress.hpp"
#include "sbnn/data.hpp"
#include "sbnn/network.hpp"
#include "sbnn/trainer.hpp"
#include "sbnn/variational.hpp"

namespace sbnn {

// {0, 10, 20, 25, 50, 75, 80, 90, 95} percent
std::vector<double> default_droprates();

struct PruneCurveRow {
  double droprate = 0.0;
  double sparsity = 0.0;
  double test_mse = 0.0;
  double test_rmse = 0.0;
};

// Test error of the mean network after pruning at each droprate, sorted by
// droprate. With a standardizer the test set is taken as standardized and
// errors are reported in original response units.
std::vector<PruneCurveRow> pruning_curve(const Model& model, const VariationalParams& vp,
                                         const Dataset& test, RankRule rule,
                                         std::span<const double> droprates,
                                         const Standardizer* scale = nullptr);

void write_prune_csv(std::ostream& out, std::span<const PruneCurveRow> rows);

// Network and optimizer settings shared by the pipelines below.
struct Setup {
  std::vector<std::size_t> hidden{50};
  Activation activation = Activation::relu;
  SpikeSlabPrior prior{0.5, 2.718281828459045, 0.0024787521766663585};
  double noise_variance = 1.0;
  TrainConfig train;

  Model model_for(std::size_t inputs) const;
};

struct BenchmarkConfig {
  Setup setup;
  double train_fraction = 0.9;
  std::size_t repeats = 5;
  std::uint64_t seed = 1;
  std::vector<double> droprates = default_droprates();
  RankRule rule = RankRule::inclusion_p;
};

struct BenchmarkRow {
  std::string dataset;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  double droprate = 0.0;
  double sparsity = 0.0;
  double rmse = 0.0;
};

struct BenchmarkSummary {
  std::string dataset;
  std::uint64_t seed = 0;  // base seed; repeat r uses seed + r
  double droprate = 0.0;
  double mean_rmse = 0.0;
  double std_error = 0.0;  // over repeats; 0 when repeats == 1
  std::size_t repeats = 0;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;
  std::vector<BenchmarkSummary> summary;
};

// Per repeat: seeded split, standardization on the training part, training,
// then the pruning curve with RMSE in original units.
BenchmarkResult benchmark_dataset(const std::string& name, const Dataset& data,
                                  const BenchmarkConfig& config);
void write_benchmark_csv(std::ostream& out, std::span<const BenchmarkSummary> rows);

// Two-feature relevance study: for each mixing weight, the relevance I of
// feature 2 and the raw importances of both features.
struct RelevanceStudy {
  std::vector<double> alphas, relevance, psi1, psi2;
  double corr_psi1 = 0.0, corr_psi2 = 0.0;
};
RelevanceStudy run_relevance_study(std::span<const double> alphas, std::size_t n,
                                   const Setup& setup, std::uint64_t seed);

// Effect-size study: correlation between phi_j and beta_j for each alpha.
struct EffectSizeStudy {
  std::vector<double> alphas, correlations;
};
EffectSizeStudy run_effect_size_study(std::span<const double> alphas, std::size_t features,
                                      std::size_t n, Link link, const Setup& setup,
                                      std::uint64_t seed);

// Select-then-refit against the unrestricted network on a held-out split.
struct SelectionStudy {
  double true_proportion = 0.0;  // realized mean of Z
  double keep_proportion = 0.0;
  double accuracy = 0.0;
  double full_test_mse = 0.0;
  double refit_test_mse = 0.0;
  std::vector<double> cv_errors;  // filled when the proportion came from CV
};
SelectionStudy run_selection_study(const SyntheticSpec& spec, double keep_proportion,
                                   const Setup& setup, double train_fraction = 0.8);
// Keep-proportion chosen by k-fold CV on the training split.
SelectionStudy run_cv_selection_study(const SyntheticSpec& spec, std::size_t folds,
                                      std::span<const double> grid, const Setup& setup,
                                      const TrainConfig& cv_train, double train_fraction = 0.8);

// Pruning curve of one trained network on synthetic data (test MSE in original units).
std::vector<PruneCurveRow> run_pruning_study(const SyntheticSpec& spec, const Setup& setup,
                                             std::span<const double> droprates,
                                             double train_fraction = 0.8);

}  // namespace sbnn
