#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sbnn/data.hpp"
#include "sbnn/variational.hpp"

namespace sbnn {

enum class OptimizerKind { sgd, adam };
enum class KlSchedule { uniform, blundell };

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  double learning_rate = 0.01;
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t mc_samples = 1;  // reparametrization draws averaged per step
  KlSchedule kl_schedule = KlSchedule::uniform;
  std::uint64_t seed = 1;
  double init_m_std = 0.1;
  double init_rho = -3.0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double objective = 0.0;   // sum over the epoch's minibatch objectives
  double train_loss = 0.0;  // mean per-example negative log-likelihood at the sampled weights
  double wall_ms = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  VariationalParams params;
  std::uint64_t seed = 0;
};

// Share of the penalty carried by each of the M minibatches of an epoch.
// uniform: 1/M each; blundell: r_i = 2^(M-i) / (2^M - 1), i = 1..M.
std::vector<double> minibatch_weights(std::size_t batches, KlSchedule schedule);

// Coordinate descent: a gradient step on (m, rho) from one reparametrized
// draw, then the closed-form update of p. Throws a numerical Error on any
// non-finite objective or gradient.
TrainReport train(const Model& model, const Dataset& data, const TrainConfig& config);
// Same loop starting from an existing state (pruned entries stay at zero).
TrainReport train_from(const Model& model, VariationalParams start, const Dataset& data,
                       const TrainConfig& config);

enum class PredictMode { mean, monte_carlo };

// mean: forward pass at W = m. monte_carlo: average of `samples` forward passes at sampled W.
Matrix predict(const Topology& topology, const VariationalParams& vp, const Matrix& x,
               PredictMode mode = PredictMode::mean, std::size_t samples = 1,
               std::uint64_t seed = 0);
// First output column of predict(), for single-output regression.
std::vector<double> predict_response(const Topology& topology, const VariationalParams& vp,
                                     const Matrix& x, PredictMode mode = PredictMode::mean,
                                     std::size_t samples = 1, std::uint64_t seed = 0);

}  // namespace sbnn
