#include "sbnn/gradlab.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sbnn/error.hpp"

namespace sbnn {

namespace {

double log_normal_density(double w, double tau) {
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(tau) - 0.5 * (w / tau) * (w / tau);
}

struct Components {
  double log_slab;   // log pi_1(w)
  double log_spike;  // log pi_0(w)
};

Components components(double w, const SpikeSlabPrior& prior) {
  return {std::log(prior.pi) + log_normal_density(w, prior.tau1),
          std::log1p(-prior.pi) + log_normal_density(w, prior.tau0)};
}

// Crossover |w| where pi_1(w) = pi_0(w), or 0 when the slab dominates everywhere.
double crossover(const SpikeSlabPrior& prior) {
  const double rhs = std::log((1.0 - prior.pi) * prior.tau1 / (prior.pi * prior.tau0));
  if (rhs <= 0.0) return 0.0;
  const double curv = 1.0 / (prior.tau0 * prior.tau0) - 1.0 / (prior.tau1 * prior.tau1);
  return std::sqrt(2.0 * rhs / curv);
}

EstimatorReport summarize(std::string name, const std::vector<double>& values, double reference) {
  EstimatorReport r;
  r.name = std::move(name);
  r.count = values.size();
  r.reference = reference;
  double mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) mean += (values[i] - mean) / double(i + 1);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  r.mean = mean;
  r.variance = values.size() > 1 ? ss / double(values.size() - 1) : 0.0;
  r.std_error = std::sqrt(r.variance / double(std::max<std::size_t>(values.size(), 1)));
  r.relative_bias = reference != 0.0 ? (mean - reference) / std::abs(reference) : 0.0;
  return r;
}

void check_inputs(double sigma, const SpikeSlabPrior& prior, std::size_t draws) {
  prior.validate();
  require(sigma > 0.0 && std::isfinite(sigma), "sigma must be positive and finite");
  require(draws > 0, "draw count must be positive");
}

// Five-point central difference.
template <class F>
double derivative(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

}  // namespace

double log_mixture_prior(double w, const SpikeSlabPrior& prior) {
  const auto c = components(w, prior);
  const double hi = std::max(c.log_slab, c.log_spike);
  return hi + std::log(std::exp(c.log_slab - hi) + std::exp(c.log_spike - hi));
}

double slab_responsibility(double w, const SpikeSlabPrior& prior) {
  const auto c = components(w, prior);
  return logistic(c.log_slab - c.log_spike);
}

double mixture_score(double w, const SpikeSlabPrior& prior) {
  const double r = slab_responsibility(w, prior);
  return w * (r / (prior.tau1 * prior.tau1) + (1.0 - r) / (prior.tau0 * prior.tau0));
}

double gaussian_expectation(const std::function<double(double)>& g, double m, double sigma,
                            const SpikeSlabPrior& prior) {
  constexpr double kSpan = 10.0;
  std::vector<double> cuts{-kSpan, kSpan};
  const double wc = crossover(prior);
  for (double w : {0.0, wc, -wc, 0.5 * wc, -0.5 * wc}) {
    const double e = (w - m) / sigma;
    if (e > -kSpan && e < kSpan) cuts.push_back(e);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto integrand = [&](double e) { return g(m + sigma * e) * norm * std::exp(-0.5 * e * e); };
  // The tolerance is relative to each segment's estimate, which can be ~0 when
  // g changes sign; the depth cap keeps such segments from recursing forever.
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, cuts[k], cuts[k + 1], 10, 1e-14);
  return total;
}

double expected_neg_log_prior(double m, double sigma, const SpikeSlabPrior& prior) {
  return gaussian_expectation([&](double w) { return -log_mixture_prior(w, prior); }, m, sigma,
                              prior);
}

double reference_grad_m(double m, double sigma, const SpikeSlabPrior& prior) {
  // E_q log q(W) does not depend on m.
  const double h = 1e-3 * std::max(sigma, std::abs(m));
  return derivative([&](double x) { return expected_neg_log_prior(x, sigma, prior); }, m, h);
}

double reference_grad_sigma2(double m, double sigma, const SpikeSlabPrior& prior) {
  // E_q log q(W) = -0.5 log(2 pi e sigma^2)
  const double s2 = sigma * sigma;
  const double h = 1e-3 * s2;
  const double d = derivative(
      [&](double v) { return expected_neg_log_prior(m, std::sqrt(v), prior); }, s2, h);
  return d - 0.5 / s2;
}

EstimatorReport bbb_grad_m(double m, double sigma, const SpikeSlabPrior& prior,
                           std::size_t draws, std::uint64_t seed) {
  check_inputs(sigma, prior, draws);
  const auto noise = NoiseDraw::generate(draws, seed, 0);
  std::vector<double> values(draws);
  for (std::size_t i = 0; i < draws; ++i) values[i] = mixture_score(m + sigma * noise.eps[i], prior);
  return summarize("bbb_grad_m", values, reference_grad_m(m, sigma, prior));
}

Sigma2Reports bbb_grad_sigma2(double m, double sigma, const SpikeSlabPrior& prior,
                              std::size_t draws, std::uint64_t seed) {
  check_inputs(sigma, prior, draws);
  const auto noise = NoiseDraw::generate(draws, seed, 0);
  const double s2 = sigma * sigma;
  std::vector<double> est(draws), one(draws), zero(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    const double e = noise.eps[i];
    const double w = m + sigma * e;
    const double r = slab_responsibility(w, prior);
    const double k = r / (prior.tau1 * prior.tau1) + (1.0 - r) / (prior.tau0 * prior.tau0);
    one[i] = (m / sigma) * e + e * e;
    zero[i] = (e * e - 1.0) + (m / sigma) * e;
    est[i] = 0.5 * one[i] * (k - 1.0 / s2) + zero[i] / (2.0 * s2);
  }
  return {summarize("bbb_grad_sigma2", est, reference_grad_sigma2(m, sigma, prior)),
          summarize("identity_one", one, 1.0), summarize("identity_zero", zero, 0.0)};
}

std::vector<ComparisonRow> variance_comparison(std::span<const GradSetting> settings,
                                               std::size_t draws, std::uint64_t seed) {
  std::vector<ComparisonRow> rows;
  rows.reserve(settings.size());
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const auto& s = settings[k];
    ComparisonRow row;
    row.setting = s;
    row.draws = draws;
    row.p_optimal = optimal_p(s.m, s.sigma, s.prior);
    const auto g = grad_penalty(s.m, s.sigma, row.p_optimal, s.prior);
    row.closed_m = g.d_m;
    row.closed_sigma2 = g.d_sigma2;
    row.mc_m = bbb_grad_m(s.m, s.sigma, s.prior, draws, seed + 2 * k);
    row.mc_sigma2 = bbb_grad_sigma2(s.m, s.sigma, s.prior, draws, seed + 2 * k + 1).estimator;
    const auto noise = NoiseDraw::generate(draws, seed + 2 * k, 0);
    double acc = 0.0;
    for (double e : noise.eps) acc += slab_responsibility(s.m + s.sigma * e, s.prior);
    row.mean_responsibility = acc / double(draws);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
  out << "# schema_version=1\n"
      << "m,sigma,pi,tau1,tau0,p_optimal,closed_grad_m,closed_grad_sigma2,"
         "mc_mean_grad_m,mc_var_grad_m,mc_se_grad_m,ref_grad_m,"
         "mc_mean_grad_sigma2,mc_var_grad_sigma2,mc_se_grad_sigma2,ref_grad_sigma2,"
         "mean_responsibility,draws\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    const auto& s = r.setting;
    out << s.m << ',' << s.sigma << ',' << s.prior.pi << ',' << s.prior.tau1 << ','
        << s.prior.tau0 << ',' << r.p_optimal << ',' << r.closed_m << ',' << r.closed_sigma2
        << ',' << r.mc_m.mean << ',' << r.mc_m.variance << ',' << r.mc_m.std_error << ','
        << r.mc_m.reference << ',' << r.mc_sigma2.mean << ',' << r.mc_sigma2.variance << ','
        << r.mc_sigma2.std_error << ',' << r.mc_sigma2.reference << ','
        << r.mean_responsibility << ',' << r.draws << '\n';
  }
}

}  // namespace sbnn
