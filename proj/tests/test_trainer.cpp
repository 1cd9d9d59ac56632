#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "oracles.hpp"
#include "sbnn/checkpoint.hpp"
#include "sbnn/error.hpp"
#include "sbnn/trainer.hpp"

using namespace sbnn;

namespace {

Dataset linear_data(std::size_t n, std::uint64_t seed) {
  oracle::Gen g(seed);
  Dataset d;
  d.x = Matrix(n, 1);
  d.feature_names = {"x"};
  for (std::size_t i = 0; i < n; ++i) {
    d.x.data[i] = g.normal();
    d.y.push_back(2.0 * d.x.data[i] + g.normal(0.0, 0.5));
  }
  return d;
}

Model small_model(std::size_t inputs) {
  Model m;
  m.topology = make_topology(inputs, {10}, 1, Activation::relu);
  m.prior = SpikeSlabPrior::from_log_taus(0.5, 0.0, -2.0);
  m.noise_variance = 0.25;
  return m;
}

TrainConfig quick(std::size_t epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 64;
  c.learning_rate = 0.01;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("minibatch_weights") {
  const auto u = minibatch_weights(4, KlSchedule::uniform);
  REQUIRE(u.size() == 4);
  for (double w : u) CHECK(w == 0.25);

  const auto b = minibatch_weights(3, KlSchedule::blundell);
  REQUIRE(b.size() == 3);
  CHECK(b[0] == doctest::Approx(4.0 / 7.0));
  CHECK(b[1] == doctest::Approx(2.0 / 7.0));
  CHECK(b[2] == doctest::Approx(1.0 / 7.0));

  for (std::size_t m : {1u, 2u, 5u, 17u, 60u, 500u, 5000u}) {
    for (auto s : {KlSchedule::uniform, KlSchedule::blundell}) {
      const auto w = minibatch_weights(m, s);
      long double sum = 0;
      for (double v : w) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(double(sum) == doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto w = minibatch_weights(m, KlSchedule::blundell);
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] <= w[i - 1]);
  }
  CHECK(minibatch_weights(1, KlSchedule::blundell)[0] == 1.0);
  CHECK_THROWS_AS(minibatch_weights(0, KlSchedule::uniform), Error);
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.epochs = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.mc_samples = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("fits a linear signal close to least squares") {
  const Dataset d = linear_data(500, 3);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < d.rows(); ++i) rows.push_back({1.0, d.x.data[i]});
  const auto beta = oracle::ols(rows, d.y);
  std::vector<double> ols_fit;
  for (auto& r : rows) ols_fit.push_back(beta[0] + beta[1] * r[1]);
  double ols_mse = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) ols_mse += std::pow(d.y[i] - ols_fit[i], 2);
  ols_mse /= d.rows();

  const Model model = small_model(1);
  const auto rep = train(model, d, quick(150));
  REQUIRE(rep.epochs.size() == 150);
  const auto pred = predict_response(model.topology, rep.params, d.x);
  double mse = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) mse += std::pow(d.y[i] - pred[i], 2);
  mse /= d.rows();
  CHECK(mse <= 1.2 * ols_mse);
  CHECK(rep.epochs.back().objective < rep.epochs.front().objective);
}

TEST_CASE("pure noise with a small prior inclusion keeps most p low") {
  oracle::Gen g(4);
  Dataset d;
  d.x = Matrix(400, 5);
  for (auto& v : d.x.data) v = g.normal();
  d.y = g.normals(400);
  d.feature_names = {"a", "b", "c", "d", "e"};
  Model model = small_model(5);
  model.prior = SpikeSlabPrior::from_log_taus(0.1, 0.0, -2.0);
  model.noise_variance = 1.0;
  auto rep = train(model, d, quick(60));
  auto p = rep.params.p;
  std::nth_element(p.begin(), p.begin() + p.size() / 2, p.end());
  CHECK(p[p.size() / 2] < 0.5);
}

TEST_CASE("training is deterministic and keeps p at its closed form") {
  const Dataset d = linear_data(200, 5);
  const Model model = small_model(1);
  auto cfg = quick(20);
  cfg.kl_schedule = KlSchedule::blundell;
  const auto a = train(model, d, cfg), b = train(model, d, cfg);
  CHECK(a.params.m == b.params.m);
  CHECK(a.params.rho == b.params.rho);
  CHECK(a.params.p == b.params.p);
  REQUIRE(a.epochs.size() == b.epochs.size());
  for (std::size_t e = 0; e < a.epochs.size(); ++e) {
    CHECK(a.epochs[e].objective == b.epochs[e].objective);
    CHECK(a.epochs[e].train_loss == b.epochs[e].train_loss);
  }
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    CHECK(a.params.p[i] == optimal_p(a.params.m[i], a.params.sigma(i), model.prior));
    CHECK(a.params.p[i] >= 0.0);
    CHECK(a.params.p[i] <= 1.0);
  }
  cfg.seed = 8;
  CHECK(train(model, d, cfg).params.m != a.params.m);
}

TEST_CASE("sgd and multi-draw steps run") {
  const Dataset d = linear_data(100, 6);
  const Model model = small_model(1);
  auto cfg = quick(5);
  cfg.optimizer = OptimizerKind::sgd;
  cfg.mc_samples = 3;
  const auto rep = train(model, d, cfg);
  CHECK(rep.epochs.size() == 5);
  for (double v : rep.params.m) CHECK(std::isfinite(v));
}

TEST_CASE("train_from keeps pruned entries at zero") {
  const Dataset d = linear_data(200, 9);
  const Model model = small_model(1);
  auto start = train(model, d, quick(5)).params;
  start.keep.assign(start.size(), 1);
  for (std::size_t i = 0; i < start.size(); i += 3) {
    start.keep[i] = 0;
    start.m[i] = 0.0;
    start.p[i] = 0.0;
  }
  const auto rep = train_from(model, start, d, quick(10));
  for (std::size_t i = 0; i < start.size(); ++i) {
    if (start.keep[i]) continue;
    CHECK(rep.params.m[i] == 0.0);
    CHECK(rep.params.p[i] == 0.0);
    CHECK(rep.params.keep[i] == 0);
  }
}

TEST_CASE("predict modes") {
  oracle::Gen g(10);
  const Topology topo = make_topology(3, {4}, 2, Activation::tanh);
  auto vp = VariationalParams::initialize(topo.param_count(),
                                          SpikeSlabPrior::from_log_taus(0.5, 0, -2), 0.5, -2.0, 3);
  Matrix x(6, 3);
  for (auto& v : x.data) v = g.normal();

  const Matrix mean = predict(topo, vp, x);
  const Matrix direct = forward_outputs(topo, mean_weights(vp), x);
  CHECK(mean.data == direct.data);
  const auto col = predict_response(topo, vp, x);
  for (std::size_t i = 0; i < x.rows; ++i) CHECK(col[i] == mean(i, 0));

  const Matrix mc1 = predict(topo, vp, x, PredictMode::monte_carlo, 20, 4);
  const Matrix mc2 = predict(topo, vp, x, PredictMode::monte_carlo, 20, 4);
  CHECK(mc1.data == mc2.data);
  CHECK(mc1.data != mean.data);

  // Nearly deterministic weights: Monte Carlo and mean predictions coincide.
  std::fill(vp.rho.begin(), vp.rho.end(), -40.0);
  const Matrix tight = predict(topo, vp, x, PredictMode::monte_carlo, 5, 1);
  const Matrix at_mean = predict(topo, vp, x);
  for (std::size_t i = 0; i < tight.data.size(); ++i)
    CHECK(tight.data[i] == doctest::Approx(at_mean.data[i]).epsilon(1e-12));
}

TEST_CASE("checkpoint round trip is bit exact") {
  const Dataset d = linear_data(100, 11);
  Checkpoint ck{small_model(1), {}};
  ck.model.topology = make_topology(1, {10, 3}, 1, Activation::tanh);
  ck.params = train(ck.model, d, quick(3)).params;
  ck.params.keep.assign(ck.params.size(), 1);
  ck.params.keep[2] = 0;
  ck.params.m[2] = 0.0;
  ck.params.p[2] = 0.0;

  const std::string bytes = encode_checkpoint(ck);
  CHECK(bytes.substr(0, 8) == "SBNNCKPT");
  const Checkpoint back = decode_checkpoint(bytes);
  CHECK(encode_checkpoint(back) == bytes);
  CHECK(back.params.m == ck.params.m);
  CHECK(back.params.rho == ck.params.rho);
  CHECK(back.params.p == ck.params.p);
  CHECK(back.params.keep == ck.params.keep);
  CHECK(back.model.prior == ck.model.prior);
  CHECK(back.model.noise_variance == ck.model.noise_variance);
  CHECK(back.model.topology.layer_sizes == ck.model.topology.layer_sizes);
  CHECK(back.model.topology.hidden == Activation::tanh);

  const std::string path = "test_trainer_ckpt.bin";
  save_checkpoint(path, ck);
  CHECK(encode_checkpoint(load_checkpoint(path)) == bytes);
  std::remove(path.c_str());

  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 5)), Error);
  std::string wrong = bytes;
  wrong[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(wrong), Error);
  std::string version = bytes;
  version[8] = 9;
  CHECK_THROWS_AS(decode_checkpoint(version), Error);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/ckpt.bin"), Error);
}
