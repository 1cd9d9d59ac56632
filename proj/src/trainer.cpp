#include "sbnn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "sbnn/error.hpp"

namespace sbnn {

void TrainConfig::validate() const {
  require(epochs >= 1, "epochs must be positive");
  require(batch_size >= 1, "batch size must be positive");
  require(learning_rate > 0.0, "learning rate must be positive");
  require(mc_samples >= 1, "mc_samples must be positive");
  require(init_m_std >= 0.0, "initial mean spread must be nonnegative");
  if (optimizer == OptimizerKind::adam)
    require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0 &&
                adam_eps > 0.0,
            "invalid Adam coefficients");
}

std::vector<double> minibatch_weights(std::size_t batches, KlSchedule schedule) {
  require(batches >= 1, "need at least one minibatch");
  std::vector<double> r(batches);
  if (schedule == KlSchedule::uniform) {
    std::fill(r.begin(), r.end(), 1.0 / static_cast<double>(batches));
    return r;
  }
  // 2^(M-i) / (2^M - 1) = 2^-i / (1 - 2^-M); this form never overflows.
  const double norm = -std::expm1(-static_cast<double>(batches) * std::log(2.0));
  for (std::size_t i = 0; i < batches; ++i)
    r[i] = std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(i + 1, 2000))) / norm;
  return r;
}

namespace {

struct Optimizer {
  const TrainConfig& cfg;
  std::vector<double> m1_m, m2_m, m1_r, m2_r;
  std::size_t t = 0;

  Optimizer(const TrainConfig& c, std::size_t n) : cfg(c) {
    if (cfg.optimizer == OptimizerKind::adam) {
      m1_m.assign(n, 0.0);
      m2_m.assign(n, 0.0);
      m1_r.assign(n, 0.0);
      m2_r.assign(n, 0.0);
    }
  }

  void step(VariationalParams& vp, const std::vector<double>& gm, const std::vector<double>& gr) {
    ++t;
    const double lr = cfg.learning_rate;
    if (cfg.optimizer == OptimizerKind::sgd) {
      for (std::size_t i = 0; i < vp.size(); ++i) {
        if (!vp.active(i)) continue;
        vp.m[i] -= lr * gm[i];
        vp.rho[i] -= lr * gr[i];
      }
      return;
    }
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    auto update = [&](double& x, double g, double& s1, double& s2) {
      s1 = b1 * s1 + (1.0 - b1) * g;
      s2 = b2 * s2 + (1.0 - b2) * g * g;
      x -= lr * (s1 / c1) / (std::sqrt(s2 / c2) + cfg.adam_eps);
    };
    for (std::size_t i = 0; i < vp.size(); ++i) {
      if (!vp.active(i)) continue;
      update(vp.m[i], gm[i], m1_m[i], m2_m[i]);
      update(vp.rho[i], gr[i], m1_r[i], m2_r[i]);
    }
  }
};

void gather(const Dataset& data, std::span<const std::size_t> rows, Matrix& x,
            std::vector<double>& y) {
  const std::size_t p = data.features();
  x = Matrix(rows.size(), p);
  y.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(data.x.data.data() + rows[r] * p, p, x.data.data() + r * p);
    y[r] = data.y[rows[r]];
  }
}

[[noreturn]] void numerical_abort(std::size_t epoch, std::size_t step, const std::string& what) {
  fail(ErrorKind::numerical, "non-finite " + what + " at epoch " + std::to_string(epoch) +
                                 ", step " + std::to_string(step));
}

}  // namespace

TrainReport train(const Model& model, const Dataset& data, const TrainConfig& config) {
  config.validate();
  model.prior.validate();
  model.topology.validate();
  auto start = VariationalParams::initialize(model.topology.param_count(), model.prior,
                                             config.init_m_std, config.init_rho, config.seed);
  return train_from(model, std::move(start), data, config);
}

TrainReport train_from(const Model& model, VariationalParams vp, const Dataset& data,
                       const TrainConfig& config) {
  config.validate();
  model.prior.validate();
  model.topology.validate();
  vp.validate();
  require(data.rows() > 0, "training data is empty");
  require(data.features() == model.topology.inputs(),
          "dataset has " + std::to_string(data.features()) + " features, topology expects " +
              std::to_string(model.topology.inputs()));
  require(vp.size() == model.topology.param_count(),
          "variational state does not match the topology's parameter count");
  data.validate();

  const std::size_t n = data.rows();
  const std::size_t batches = (n + config.batch_size - 1) / config.batch_size;
  const std::vector<double> kl = minibatch_weights(batches, config.kl_schedule);
  const std::size_t count = vp.size();
  const double samples = static_cast<double>(config.mc_samples);

  Optimizer opt(config, count);
  TrainReport report;
  report.seed = config.seed;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> gm(count), gr(count);
  Matrix xb;
  std::vector<double> yb;
  std::uint64_t draw = 0;
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(epoch), 0xba7cu};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);

    double objective = 0.0, loss = 0.0;
    for (std::size_t b = 0; b < batches; ++b, ++step) {
      const std::size_t lo = b * n / batches, hi = (b + 1) * n / batches;
      gather(data, std::span(order).subspan(lo, hi - lo), xb, yb);

      std::fill(gm.begin(), gm.end(), 0.0);
      std::fill(gr.begin(), gr.end(), 0.0);
      double batch_nll = 0.0, penalty = 0.0;
      for (std::size_t s = 0; s < config.mc_samples; ++s) {
        const NoiseDraw eps = NoiseDraw::generate(count, config.seed, draw++);
        const StepGradients g = step_gradients(model, vp, xb, yb, eps, kl[b]);
        for (std::size_t i = 0; i < count; ++i) {
          gm[i] += g.d_m[i];
          gr[i] += g.d_rho[i];
        }
        batch_nll += g.nll;
        penalty = g.penalty;
      }
      batch_nll /= samples;
      if (!std::isfinite(batch_nll)) numerical_abort(epoch, step, "negative log-likelihood");
      if (!std::isfinite(penalty)) numerical_abort(epoch, step, "penalty");

      // Step along the per-example scale of the minibatch objective.
      const double scale = 1.0 / (samples * static_cast<double>(hi - lo));
      for (std::size_t i = 0; i < count; ++i) {
        gm[i] *= scale;
        gr[i] *= scale;
        if (!std::isfinite(gm[i]) || !std::isfinite(gr[i]))
          numerical_abort(epoch, step, "gradient for parameter " + std::to_string(i));
      }
      opt.step(vp, gm, gr);
      vp.refresh_p(model.prior);

      objective += batch_nll + kl[b] * penalty;
      loss += batch_nll;
    }
    const auto t1 = std::chrono::steady_clock::now();
    report.epochs.push_back(
        {epoch, objective, loss / static_cast<double>(n),
         std::chrono::duration<double, std::milli>(t1 - t0).count()});
  }
  report.params = std::move(vp);
  return report;
}

Matrix predict(const Topology& topology, const VariationalParams& vp, const Matrix& x,
               PredictMode mode, std::size_t samples, std::uint64_t seed) {
  if (mode == PredictMode::mean) return forward_outputs(topology, mean_weights(vp), x);
  require(samples >= 1, "Monte Carlo prediction needs at least one sample");
  Matrix acc;
  for (std::size_t s = 0; s < samples; ++s) {
    const Matrix out =
        forward_outputs(topology, sample_weights(vp, NoiseDraw::generate(vp.size(), seed, s)), x);
    if (acc.empty())
      acc = out;
    else
      for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += out.data[i];
  }
  for (double& v : acc.data) v /= static_cast<double>(samples);
  return acc;
}

std::vector<double> predict_response(const Topology& topology, const VariationalParams& vp,
                                     const Matrix& x, PredictMode mode, std::size_t samples,
                                     std::uint64_t seed) {
  const Matrix out = predict(topology, vp, x, mode, samples, seed);
  std::vector<double> y(out.rows);
  for (std::size_t r = 0; r < out.rows; ++r) y[r] = out(r, 0);
  return y;
}

}  // namespace sbnn
