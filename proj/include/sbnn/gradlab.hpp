#pragma once

// Side-by-side check of the closed-form penalty gradients against the
// single-draw estimators of a mixture-prior (Bayes by Backprop style)
// objective f(W) = -log pi(W) + log q(W).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sbnn/variational.hpp"

namespace sbnn {

struct EstimatorReport {
  std::string name;
  double mean = 0.0;
  double variance = 0.0;   // sample variance of single-draw values
  double std_error = 0.0;  // sqrt(variance / count)
  std::size_t count = 0;
  double reference = 0.0;
  double relative_bias = 0.0;  // (mean - reference) / |reference|, 0 when reference is 0
};

// log(pi N(w; 0, tau1^2) + (1 - pi) N(w; 0, tau0^2)), evaluated with log-sum-exp.
double log_mixture_prior(double w, const SpikeSlabPrior& prior);
// pi_1(w) / pi(w) = E(Z | W = w) under the prior.
double slab_responsibility(double w, const SpikeSlabPrior& prior);
// -d/dw log pi(w)
double mixture_score(double w, const SpikeSlabPrior& prior);

// E_{N(m, sigma^2)}[g(W)] by adaptive Gauss-Kronrod quadrature.
// The prior is used only to place breakpoints at its spike/slab crossover.
double gaussian_expectation(const std::function<double(double)>& g, double m, double sigma,
                            const SpikeSlabPrior& prior);
double expected_neg_log_prior(double m, double sigma, const SpikeSlabPrior& prior);

// d/dm and d/dsigma^2 of E_q[-log pi(W) + log q(W)], by central differences
// of the quadrature value.
double reference_grad_m(double m, double sigma, const SpikeSlabPrior& prior);
double reference_grad_sigma2(double m, double sigma, const SpikeSlabPrior& prior);

EstimatorReport bbb_grad_m(double m, double sigma, const SpikeSlabPrior& prior,
                           std::size_t draws, std::uint64_t seed = 7);

struct Sigma2Reports {
  EstimatorReport estimator;     // three-term single-draw estimator
  EstimatorReport identity_one;  // (m/sigma) eps + eps^2, expectation 1
  EstimatorReport identity_zero; // (eps^2 - 1) + (m/sigma) eps, expectation 0
};
Sigma2Reports bbb_grad_sigma2(double m, double sigma, const SpikeSlabPrior& prior,
                              std::size_t draws, std::uint64_t seed = 11);

struct GradSetting {
  double m = 0.0;
  double sigma = 1.0;
  SpikeSlabPrior prior;
};

struct ComparisonRow {
  GradSetting setting;
  double p_optimal = 0.0;
  double closed_m = 0.0;       // closed-form dR/dm at p = optimal p
  double closed_sigma2 = 0.0;  // closed-form dR/dsigma^2 at p = optimal p
  EstimatorReport mc_m;
  EstimatorReport mc_sigma2;
  double mean_responsibility = 0.0;  // Monte Carlo E_q[E(Z | W)]
  std::size_t draws = 0;
};

std::vector<ComparisonRow> variance_comparison(std::span<const GradSetting> settings,
                                               std::size_t draws, std::uint64_t seed);
void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows);

}  // namespace sbnn
