#pragma once

// Spike-and-slab variational family: q(W) = prod N(m_i, sigma_i^2) with
// sigma_i = softplus(rho_i), q(Z) = prod Bernoulli(p_i), under the prior
// pi * N(0, tau1^2) + (1 - pi) * N(0, tau0^2) on every weight and bias.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sbnn/matrix.hpp"
#include "sbnn/network.hpp"

namespace sbnn {

struct SpikeSlabPrior {
  double pi = 0.5;
  double tau1 = 2.718281828459045;    // slab standard deviation
  double tau0 = 0.0024787521766663585;  // spike standard deviation

  // Requires 0 < pi < 1 and 0 < tau0 < tau1.
  void validate() const;
  static SpikeSlabPrior from_log_taus(double pi, double log_tau1, double log_tau0);

  bool operator==(const SpikeSlabPrior&) const = default;
};

// Network definition plus likelihood settings shared by every objective call.
struct Model {
  Topology topology;
  SpikeSlabPrior prior;
  double noise_variance = 1.0;  // Gaussian observation variance for regression heads
};

struct VariationalParams {
  std::vector<double> m;
  std::vector<double> rho;
  std::vector<double> p;
  // Empty means every parameter is active. A zero entry marks a parameter that
  // was pruned: it is identically zero in every draw and carries no gradient.
  std::vector<std::uint8_t> keep;

  std::size_t size() const { return m.size(); }
  bool active(std::size_t i) const { return keep.empty() || keep[i] != 0; }
  double sigma(std::size_t i) const;
  void validate() const;

  // m ~ N(0, m_std^2), rho = rho0, p set to the closed-form optimum.
  static VariationalParams initialize(std::size_t count, const SpikeSlabPrior& prior,
                                      double m_std, double rho0, std::uint64_t seed);
  // p <- optimal_p(m, sigma, prior) for every active entry; pruned entries keep p = 0.
  void refresh_p(const SpikeSlabPrior& prior);
};

// Standard-normal draw, reproducible from (seed, index).
struct NoiseDraw {
  std::vector<double> eps;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;

  static NoiseDraw generate(std::size_t count, std::uint64_t seed, std::uint64_t index);
  static NoiseDraw zeros(std::size_t count);
};

// log(1 + e^rho) without overflow or underflow.
double sigma_of_rho(double rho);
// d sigma / d rho = 1 / (1 + e^-rho)
double logistic(double x);

ParameterVector sample_weights(const VariationalParams& vp, const NoiseDraw& eps);
ParameterVector mean_weights(const VariationalParams& vp);

double penalty_R(double m, double sigma, double p, const SpikeSlabPrior& prior);
double optimal_p(double m, double sigma, const SpikeSlabPrior& prior);
// 2 (logit p* - logit pi)
double logit_gap(double m, double sigma, const SpikeSlabPrior& prior);

struct PenaltyGradient {
  double d_m = 0.0;
  double d_sigma2 = 0.0;
};
// Gradients of penalty_R with p held fixed.
PenaltyGradient grad_penalty(double m, double sigma, double p, const SpikeSlabPrior& prior);

// Sum of penalty_R over active parameters.
double total_penalty(const VariationalParams& vp, const SpikeSlabPrior& prior);

// nll(W(eps)) + kl_weight * sum R, with p held at vp.p.
double objective_with_noise(const Model& model, const VariationalParams& vp, const Matrix& x,
                            std::span<const double> y, const NoiseDraw& eps, double kl_weight);

// Monte Carlo estimate over `samples` draws seeded from `seed`.
double objective_estimate(const Model& model, const VariationalParams& vp, const Matrix& x,
                          std::span<const double> y, std::size_t samples, double kl_weight,
                          std::uint64_t seed);

struct StepGradients {
  ParameterVector d_m;
  ParameterVector d_rho;
  double nll = 0.0;      // likelihood term at the sampled weights
  double penalty = 0.0;  // unweighted sum R
};

// Single-draw reparametrization gradient of objective_with_noise w.r.t. (m, rho).
StepGradients step_gradients(const Model& model, const VariationalParams& vp, const Matrix& x,
                             std::span<const double> y, const NoiseDraw& eps, double kl_weight);

}  // namespace sbnn
