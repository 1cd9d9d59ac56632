#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sbnn/data.hpp"
#include "sbnn/trainer.hpp"

namespace sbnn {

enum class RankRule { inclusion_p, second_moment, snr };

const char* rule_name(RankRule rule);
// Accepts "p"/"inclusion_p", "m2"/"second_moment", "snr".
RankRule parse_rule(const std::string& text);

struct PruneMask {
  std::vector<std::uint8_t> keep;  // canonical parameter order
  RankRule rule = RankRule::inclusion_p;
  double droprate = 0.0;
};

// Higher means keep: p_i, m_i^2 + sigma_i^2, or |m_i| / sigma_i.
std::vector<double> rank_score(const VariationalParams& vp, RankRule rule);

// Parameter indices in drop order (lowest score first). Ties on the score are
// broken by the second moment for the inclusion rule (p saturates to exactly
// 0 or 1 in floating point while its driver m^2 + sigma^2 does not), then by
// ascending canonical index.
std::vector<std::size_t> drop_order(const VariationalParams& vp, RankRule rule);

// Drops round(droprate * M) parameters: m = 0, p = 0, sigma frozen, and the
// entry becomes identically zero in every draw.
std::pair<PruneMask, VariationalParams> prune(const VariationalParams& vp, RankRule rule,
                                              double droprate);

double sparsity(const PruneMask& mask);

void save_mask(const std::string& path, const PruneMask& mask);
PruneMask load_mask(const std::string& path);

// Average over all input-to-output paths of the product of weight inclusion
// probabilities along the path (biases excluded). Single-output heads only.
std::vector<double> feature_importance_psi(const Topology& topology, const VariationalParams& vp);

// Min-max rescaling of psi to [0, 1]. Constant psi gives all zeros and a warning.
std::vector<double> feature_importance_phi(std::span<const double> psi,
                                           std::vector<std::string>* warnings = nullptr);

// Quantile with linear interpolation between order statistics
// (position q * (n - 1) in the sorted sample).
double quantile(std::span<const double> values, double q);

struct ImportanceReport {
  std::vector<double> psi;
  std::vector<double> phi;
  double threshold = 0.0;
  std::vector<std::uint8_t> selected;  // phi_j >= threshold
};

// Features with phi at or above the keep_quantile-th quantile of phi. If none
// survive, the single largest-phi feature is kept and a warning is recorded.
ImportanceReport importance_report(const Topology& topology, const VariationalParams& vp,
                                   double keep_quantile,
                                   std::vector<std::string>* warnings = nullptr);
ImportanceReport select_by_quantile(std::vector<double> psi, double keep_quantile,
                                    std::vector<std::string>* warnings = nullptr);

void write_importance_csv(const std::string& path, const ImportanceReport& report);

double selection_accuracy(std::span<const std::uint8_t> z_true, std::span<const std::uint8_t> z_hat);

struct SelectionOutcome {
  ImportanceReport importance;
  double active_proportion = 0.0;
  double accuracy = -1.0;  // -1 when no ground truth is attached
  Model refit_model;       // refit topology has the same shape on masked inputs
  TrainReport refit;
};

// Threshold phi at its keep_quantile-th quantile, zero the dropped input
// columns, and train a fresh network on the masked inputs.
SelectionOutcome variable_selection(const Model& model, const VariationalParams& vp,
                                    const Dataset& data, double keep_quantile,
                                    const TrainConfig& retrain,
                                    std::vector<std::string>* warnings = nullptr);

struct CvResult {
  double best_proportion = 1.0;
  std::vector<double> proportions;
  std::vector<double> mean_errors;  // mean validation MSE per proportion
};

std::vector<double> default_cv_grid();

// For every candidate keep-proportion, the validation MSE of
// select-then-refit averaged over folds; the minimizer wins, ties going to
// the smaller proportion.
CvResult cv_threshold(const Model& model, const Dataset& data, const TrainConfig& config,
                      std::size_t folds, std::span<const double> candidate_proportions,
                      std::uint64_t seed);

}  // namespace sbnn
