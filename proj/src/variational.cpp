#include "sbnn/variational.hpp"

#include <cmath>
#include <random>
#include <string>

#include "sbnn/error.hpp"

namespace sbnn {

void SpikeSlabPrior::validate() const {
  if (!(pi > 0.0 && pi < 1.0))
    fail(ErrorKind::invalid_argument, "prior pi must lie in (0, 1), got " + std::to_string(pi));
  if (!(tau0 > 0.0 && tau0 < tau1))
    fail(ErrorKind::invalid_argument, "prior requires 0 < tau0 < tau1, got tau0=" +
                                          std::to_string(tau0) + " tau1=" + std::to_string(tau1));
}

SpikeSlabPrior SpikeSlabPrior::from_log_taus(double pi, double log_tau1, double log_tau0) {
  SpikeSlabPrior p{pi, std::exp(log_tau1), std::exp(log_tau0)};
  p.validate();
  return p;
}

double sigma_of_rho(double rho) {
  // softplus: rho + log1p(e^-rho) for large rho, log1p(e^rho) otherwise
  if (rho > 0.0) return rho + std::log1p(std::exp(-rho));
  return std::log1p(std::exp(rho));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double VariationalParams::sigma(std::size_t i) const { return sigma_of_rho(rho[i]); }

void VariationalParams::validate() const {
  if (rho.size() != m.size() || p.size() != m.size() || (!keep.empty() && keep.size() != m.size()))
    fail(ErrorKind::invalid_argument, "variational parameter vectors have inconsistent lengths");
}

VariationalParams VariationalParams::initialize(std::size_t count, const SpikeSlabPrior& prior,
                                                double m_std, double rho0, std::uint64_t seed) {
  prior.validate();
  VariationalParams vp;
  vp.m.resize(count);
  vp.rho.assign(count, rho0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, m_std);
  for (double& v : vp.m) v = normal(rng);
  vp.p.assign(count, 0.0);
  vp.refresh_p(prior);
  return vp;
}

void VariationalParams::refresh_p(const SpikeSlabPrior& prior) {
  for (std::size_t i = 0; i < m.size(); ++i)
    p[i] = active(i) ? optimal_p(m[i], sigma(i), prior) : 0.0;
}

NoiseDraw NoiseDraw::generate(std::size_t count, std::uint64_t seed, std::uint64_t index) {
  NoiseDraw d;
  d.seed = seed;
  d.index = index;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x5eedu};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  d.eps.resize(count);
  for (double& e : d.eps) e = normal(rng);
  return d;
}

NoiseDraw NoiseDraw::zeros(std::size_t count) {
  NoiseDraw d;
  d.eps.assign(count, 0.0);
  return d;
}

ParameterVector sample_weights(const VariationalParams& vp, const NoiseDraw& eps) {
  require(eps.eps.size() == vp.size(), "noise draw length does not match parameter count");
  ParameterVector w(vp.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = vp.active(i) ? vp.m[i] + vp.sigma(i) * eps.eps[i] : 0.0;
  return w;
}

ParameterVector mean_weights(const VariationalParams& vp) {
  ParameterVector w(vp.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = vp.active(i) ? vp.m[i] : 0.0;
  return w;
}

namespace {

// x * log(x) with the 0 * log 0 = 0 convention.
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

double penalty_R(double m, double sigma, double p, const SpikeSlabPrior& prior) {
  prior.validate();
  const double s = m * m + sigma * sigma;
  const double log_sigma = std::log(sigma);
  const double slab = s / (2.0 * prior.tau1 * prior.tau1) + std::log(prior.tau1) - log_sigma -
                      std::log(prior.pi);
  const double spike = s / (2.0 * prior.tau0 * prior.tau0) + std::log(prior.tau0) - log_sigma -
                       std::log1p(-prior.pi);
  double r = xlogx(p) + xlogx(1.0 - p);
  if (p > 0.0) r += p * slab;
  if (p < 1.0) r += (1.0 - p) * spike;
  return r;
}

double logit_gap(double m, double sigma, const SpikeSlabPrior& prior) {
  const double s = m * m + sigma * sigma;
  const double t1 = prior.tau1 * prior.tau1, t0 = prior.tau0 * prior.tau0;
  return s * (1.0 / t0 - 1.0 / t1) - std::log(t1 / t0);
}

double optimal_p(double m, double sigma, const SpikeSlabPrior& prior) {
  // logit p* = B - A
  const double s = m * m + sigma * sigma;
  const double a = s / (2.0 * prior.tau1 * prior.tau1) + std::log(prior.tau1 / prior.pi);
  const double b = s / (2.0 * prior.tau0 * prior.tau0) + std::log(prior.tau0 / (1.0 - prior.pi));
  return logistic(b - a);
}

PenaltyGradient grad_penalty(double m, double sigma, double p, const SpikeSlabPrior& prior) {
  const double precision = p / (prior.tau1 * prior.tau1) + (1.0 - p) / (prior.tau0 * prior.tau0);
  return {m * precision, 0.5 * (precision - 1.0 / (sigma * sigma))};
}

double total_penalty(const VariationalParams& vp, const SpikeSlabPrior& prior) {
  double total = 0.0;
  for (std::size_t i = 0; i < vp.size(); ++i)
    if (vp.active(i)) total += penalty_R(vp.m[i], vp.sigma(i), vp.p[i], prior);
  return total;
}

double objective_with_noise(const Model& model, const VariationalParams& vp, const Matrix& x,
                            std::span<const double> y, const NoiseDraw& eps, double kl_weight) {
  require(x.rows > 0, "objective requires a nonempty batch");
  const ParameterVector w = sample_weights(vp, eps);
  const Matrix out = forward_outputs(model.topology, w, x);
  return nll(model.topology.head, out, y, model.noise_variance) +
         kl_weight * total_penalty(vp, model.prior);
}

double objective_estimate(const Model& model, const VariationalParams& vp, const Matrix& x,
                          std::span<const double> y, std::size_t samples, double kl_weight,
                          std::uint64_t seed) {
  require(samples >= 1, "objective estimate needs at least one Monte Carlo sample");
  require(kl_weight > 0.0 && kl_weight <= 1.0, "kl_weight must lie in (0, 1]");
  require(x.rows > 0, "objective requires a nonempty batch");
  const double penalty = total_penalty(vp, model.prior);
  double acc = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const NoiseDraw eps = NoiseDraw::generate(vp.size(), seed, s);
    const Matrix out = forward_outputs(model.topology, sample_weights(vp, eps), x);
    acc += nll(model.topology.head, out, y, model.noise_variance);
  }
  return acc / static_cast<double>(samples) + kl_weight * penalty;
}

StepGradients step_gradients(const Model& model, const VariationalParams& vp, const Matrix& x,
                             std::span<const double> y, const NoiseDraw& eps, double kl_weight) {
  vp.validate();
  require(x.rows > 0, "step gradients require a nonempty batch");
  require(eps.eps.size() == vp.size(), "noise draw length does not match parameter count");
  const ParameterVector w = sample_weights(vp, eps);
  const ForwardTrace trace = forward(model.topology, w, x);
  const Matrix& out = trace.output();
  StepGradients g;
  g.nll = nll(model.topology.head, out, y, model.noise_variance);
  const ParameterVector dw =
      backward(trace, w, nll_output_gradient(model.topology.head, out, y, model.noise_variance));

  g.d_m.assign(vp.size(), 0.0);
  g.d_rho.assign(vp.size(), 0.0);
  for (std::size_t i = 0; i < vp.size(); ++i) {
    if (!vp.active(i)) continue;
    const double sigma = vp.sigma(i);
    const double dsigma_drho = logistic(vp.rho[i]);
    const PenaltyGradient pg = grad_penalty(vp.m[i], sigma, vp.p[i], model.prior);
    g.penalty += penalty_R(vp.m[i], sigma, vp.p[i], model.prior);
    g.d_m[i] = dw[i] + kl_weight * pg.d_m;
    g.d_rho[i] = dw[i] * eps.eps[i] * dsigma_drho +
                 kl_weight * pg.d_sigma2 * 2.0 * sigma * dsigma_drho;
  }
  return g;
}

}  // namespace sbnn
