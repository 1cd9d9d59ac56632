// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "sbnn/sbnn.h"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Fixture {
  sbnn_dataset* data = nullptr;
  sbnn_checkpoint* ckpt = nullptr;
  sbnn_train_log* log = nullptr;
  size_t hidden[2] = {6, 4};
  sbnn_model_spec spec{};
  sbnn_train_options opt{};

  Fixture() {
    REQUIRE(sbnn_dataset_two_feature(0.7, 300, 2, &data) == SBNN_OK);
    sbnn_model_spec_default(&spec);
    spec.hidden = hidden;
    spec.hidden_count = 2;
    spec.prior = {0.5, 0.0, -2.0};
    sbnn_train_options_default(&opt);
    opt.epochs = 8;
    opt.batch_size = 50;
    opt.seed = 3;
    REQUIRE(sbnn_train(&spec, data, &opt, &ckpt, &log) == SBNN_OK);
  }
  ~Fixture() {
    sbnn_checkpoint_free(ckpt);
    sbnn_train_log_free(log);
    sbnn_dataset_free(data);
  }
};

}  // namespace

TEST_CASE("version and null handling") {
  CHECK(std::string(sbnn_version()).size() > 0);
  sbnn_dataset_free(nullptr);
  sbnn_checkpoint_free(nullptr);
  sbnn_scaler_free(nullptr);
  sbnn_train_log_free(nullptr);
  CHECK(sbnn_dataset_two_feature(0.5, 10, 1, nullptr) == SBNN_ERR_INVALID_ARGUMENT);
  CHECK(std::string(sbnn_last_error()).size() > 0);
  CHECK(sbnn_train(nullptr, nullptr, nullptr, nullptr, nullptr) == SBNN_ERR_INVALID_ARGUMENT);
}

TEST_CASE("error codes map error kinds") {
  sbnn_dataset* d = nullptr;
  CHECK(sbnn_dataset_load_csv("/nonexistent/file.csv", "y", 0, 0, &d) == SBNN_ERR_IO);
  CHECK(d == nullptr);
  CHECK(std::string(sbnn_last_error()).find("nonexistent") != std::string::npos);
  CHECK(sbnn_dataset_two_feature(2.0, 10, 1, &d) == SBNN_ERR_INVALID_ARGUMENT);

  REQUIRE(sbnn_dataset_two_feature(0.5, 40, 1, &d) == SBNN_OK);
  size_t hidden = 3;
  sbnn_model_spec spec;
  sbnn_model_spec_default(&spec);
  spec.hidden = &hidden;
  spec.hidden_count = 1;
  spec.prior = {0.5, -1.0, 0.0};  // tau0 above tau1
  sbnn_train_options opt;
  sbnn_train_options_default(&opt);
  sbnn_checkpoint* c = nullptr;
  CHECK(sbnn_train(&spec, d, &opt, &c, nullptr) == SBNN_ERR_CONFIG);
  CHECK(std::string(sbnn_last_error()).find("tau") != std::string::npos);
  CHECK(c == nullptr);
  sbnn_dataset_free(d);
}

TEST_CASE("defaults") {
  sbnn_model_spec spec;
  sbnn_model_spec_default(&spec);
  CHECK(spec.prior.pi == 0.5);
  CHECK(spec.prior.log_tau1 == 1.0);
  CHECK(spec.prior.log_tau0 == -6.0);
  CHECK(spec.hidden_count == 0);
  sbnn_train_options opt;
  sbnn_train_options_default(&opt);
  CHECK(opt.epochs > 0);
  CHECK(opt.optimizer == SBNN_ADAM);
}

TEST_CASE("train, checkpoint, predict") {
  Fixture f;
  CHECK(sbnn_train_log_epochs(f.log) == 8);
  sbnn_epoch_record rec;
  CHECK(sbnn_train_log_get(f.log, 7, &rec) == SBNN_OK);
  CHECK(rec.epoch == 8);
  CHECK(std::isfinite(rec.objective));
  CHECK(sbnn_train_log_get(f.log, 8, &rec) == SBNN_ERR_INVALID_ARGUMENT);

  const size_t n = sbnn_checkpoint_param_count(f.ckpt);
  CHECK(n == (2 * 6 + 6) + (6 * 4 + 4) + (4 + 1));
  CHECK(sbnn_checkpoint_inputs(f.ckpt) == 2);
  std::vector<double> m(n), rho(n), p(n);
  REQUIRE(sbnn_checkpoint_params(f.ckpt, m.data(), rho.data(), p.data()) == SBNN_OK);

  const std::string path = "test_capi.ckpt";
  REQUIRE(sbnn_checkpoint_save(f.ckpt, path.c_str()) == SBNN_OK);
  sbnn_checkpoint* back = nullptr;
  REQUIRE(sbnn_checkpoint_load(path.c_str(), &back) == SBNN_OK);
  std::vector<double> m2(n), p2(n);
  REQUIRE(sbnn_checkpoint_params(back, m2.data(), nullptr, p2.data()) == SBNN_OK);
  CHECK(m2 == m);
  CHECK(p2 == p);

  std::vector<double> a(sbnn_dataset_rows(f.data)), b(a.size());
  REQUIRE(sbnn_predict(f.ckpt, f.data, a.data()) == SBNN_OK);
  REQUIRE(sbnn_predict(back, f.data, b.data()) == SBNN_OK);
  CHECK(a == b);
  sbnn_checkpoint_free(back);
  std::remove(path.c_str());

  // Same seed, same bytes.
  sbnn_checkpoint* again = nullptr;
  REQUIRE(sbnn_train(&f.spec, f.data, &f.opt, &again, nullptr) == SBNN_OK);
  REQUIRE(sbnn_checkpoint_save(f.ckpt, "a.ckpt") == SBNN_OK);
  REQUIRE(sbnn_checkpoint_save(again, "b.ckpt") == SBNN_OK);
  CHECK(slurp("a.ckpt") == slurp("b.ckpt"));
  std::remove("a.ckpt");
  std::remove("b.ckpt");
  sbnn_checkpoint_free(again);
}

TEST_CASE("prune and importance") {
  Fixture f;
  sbnn_checkpoint* pruned = nullptr;
  double sparsity = -1;
  REQUIRE(sbnn_prune(f.ckpt, SBNN_RULE_P, 0.5, &pruned, &sparsity) == SBNN_OK);
  const size_t n = sbnn_checkpoint_param_count(pruned);
  CHECK(sparsity == doctest::Approx(std::round(0.5 * n) / n));
  std::vector<double> m(n);
  sbnn_checkpoint_params(pruned, m.data(), nullptr, nullptr);
  size_t zeros = 0;
  for (double v : m) zeros += v == 0.0;
  CHECK(zeros >= size_t(std::round(0.5 * n)));
  CHECK(sbnn_mask_save(pruned, SBNN_RULE_P, 0.5, "test_capi_mask.json") == SBNN_OK);
  std::remove("test_capi_mask.json");
  sbnn_checkpoint_free(pruned);
  CHECK(sbnn_prune(f.ckpt, SBNN_RULE_P, 1.0, &pruned, nullptr) == SBNN_ERR_INVALID_ARGUMENT);

  const double rates[] = {0.5, 0.0, 0.25};
  sbnn_prune_row rows[3];
  REQUIRE(sbnn_prune_curve(f.ckpt, f.data, nullptr, SBNN_RULE_SNR, rates, 3, rows) == SBNN_OK);
  CHECK(rows[0].droprate == 0.0);
  CHECK(rows[1].droprate == 0.25);
  CHECK(rows[2].droprate == 0.5);
  CHECK(rows[0].sparsity == 0.0);
  CHECK(rows[0].test_rmse == doctest::Approx(std::sqrt(rows[0].test_mse)));

  double psi[2], phi[2], threshold;
  uint8_t selected[2];
  REQUIRE(sbnn_importance(f.ckpt, 0.5, psi, phi, selected, &threshold) == SBNN_OK);
  CHECK(std::max(phi[0], phi[1]) == 1.0);
  CHECK(std::min(phi[0], phi[1]) == 0.0);
  CHECK(selected[0] + selected[1] >= 1);
  CHECK(sbnn_importance(f.ckpt, 0.5, nullptr, nullptr, nullptr, nullptr) == SBNN_OK);
}

TEST_CASE("scaler round trip") {
  Fixture f;
  sbnn_scaler* s = nullptr;
  REQUIRE(sbnn_scaler_fit(f.data, 1, &s) == SBNN_OK);
  REQUIRE(sbnn_scaler_save(s, "test_capi_scaler.json") == SBNN_OK);
  sbnn_scaler* t = nullptr;
  REQUIRE(sbnn_scaler_load("test_capi_scaler.json", &t) == SBNN_OK);
  sbnn_dataset *a = nullptr, *b = nullptr;
  REQUIRE(sbnn_scaler_apply(s, f.data, &a) == SBNN_OK);
  REQUIRE(sbnn_scaler_apply(t, f.data, &b) == SBNN_OK);
  REQUIRE(sbnn_dataset_save_csv(a, "test_capi_a.csv") == SBNN_OK);
  REQUIRE(sbnn_dataset_save_csv(b, "test_capi_b.csv") == SBNN_OK);
  CHECK(slurp("test_capi_a.csv") == slurp("test_capi_b.csv"));
  for (const char* p : {"test_capi_scaler.json", "test_capi_a.csv", "test_capi_b.csv"}) std::remove(p);
  sbnn_dataset_free(a);
  sbnn_dataset_free(b);
  sbnn_scaler_free(s);
  sbnn_scaler_free(t);
}

TEST_CASE("synthetic data, split and selection") {
  sbnn_synthetic_spec sp;
  sbnn_synthetic_default(&sp);
  sp.n = 300;
  sp.features = 6;
  sp.pi_active = 0.5;
  sp.link = SBNN_LINK_LINEAR;
  sbnn_dataset* d = nullptr;
  REQUIRE(sbnn_dataset_synthetic(&sp, &d) == SBNN_OK);
  CHECK(sbnn_dataset_features(d) == 6);
  REQUIRE(sbnn_dataset_save_truth(d, "test_capi_truth.csv") == SBNN_OK);
  sbnn_dataset *train = nullptr, *test = nullptr;
  REQUIRE(sbnn_dataset_split(d, 0.8, 1, &train, &test) == SBNN_OK);
  CHECK(sbnn_dataset_rows(train) == 240);
  CHECK(sbnn_dataset_rows(test) == 60);
  REQUIRE(sbnn_dataset_load_truth(test, "test_capi_truth.csv") == SBNN_OK);
  std::remove("test_capi_truth.csv");

  size_t hidden = 8;
  sbnn_model_spec spec;
  sbnn_model_spec_default(&spec);
  spec.hidden = &hidden;
  spec.hidden_count = 1;
  spec.prior = {0.5, 0.0, -2.0};
  sbnn_train_options opt;
  sbnn_train_options_default(&opt);
  opt.epochs = 5;
  opt.batch_size = 40;
  sbnn_checkpoint* c = nullptr;
  REQUIRE(sbnn_train(&spec, train, &opt, &c, nullptr) == SBNN_OK);
  sbnn_selection sel;
  sbnn_checkpoint* refit = nullptr;
  REQUIRE(sbnn_select(c, train, test, nullptr, 0.5, &opt, &sel, &refit) == SBNN_OK);
  CHECK(sel.keep_proportion == 0.5);
  CHECK(sel.active_proportion > 0.0);
  CHECK(sel.accuracy >= 0.0);
  CHECK(sel.refit_test_mse > 0.0);
  CHECK(sel.full_test_mse > 0.0);
  CHECK(refit != nullptr);

  const double props[] = {0.5, 1.0};
  double best = 0, errors[2];
  REQUIRE(sbnn_cv_threshold(&spec, train, &opt, 3, props, 2, 1, &best, errors) == SBNN_OK);
  CHECK((best == 0.5 || best == 1.0));
  CHECK(errors[0] > 0.0);

  // With a scaler the test rows stay raw and errors come back in original units.
  // Both errors scale by the same y variance, so their ratio is unchanged.
  sbnn_scaler* scaler = nullptr;
  REQUIRE(sbnn_scaler_fit(train, 1, &scaler) == SBNN_OK);
  sbnn_dataset *strain = nullptr, *stest = nullptr;
  REQUIRE(sbnn_scaler_apply(scaler, train, &strain) == SBNN_OK);
  REQUIRE(sbnn_scaler_apply(scaler, test, &stest) == SBNN_OK);
  sbnn_checkpoint* sc = nullptr;
  REQUIRE(sbnn_train(&spec, strain, &opt, &sc, nullptr) == SBNN_OK);
  sbnn_selection std_units, raw_units;
  REQUIRE(sbnn_select(sc, strain, stest, nullptr, 0.5, &opt, &std_units, nullptr) == SBNN_OK);
  REQUIRE(sbnn_select(sc, strain, test, scaler, 0.5, &opt, &raw_units, nullptr) == SBNN_OK);
  CHECK(raw_units.full_test_mse > 10 * std_units.full_test_mse);
  CHECK(raw_units.refit_test_mse / raw_units.full_test_mse ==
        doctest::Approx(std_units.refit_test_mse / std_units.full_test_mse).epsilon(1e-9));
  sbnn_checkpoint_free(sc);
  sbnn_dataset_free(strain);
  sbnn_dataset_free(stest);
  sbnn_scaler_free(scaler);

  sbnn_checkpoint_free(refit);
  sbnn_checkpoint_free(c);
  sbnn_dataset_free(train);
  sbnn_dataset_free(test);
  sbnn_dataset_free(d);
}

TEST_CASE("gradcheck csv") {
  const sbnn_grad_setting settings[] = {{0.3, 0.2, {0.5, 0.0, -2.0}}, {0.0, 0.5, {0.2, 1.0, -3.0}}};
  REQUIRE(sbnn_gradcheck(settings, 2, 1000, 1, "test_capi_grad.csv") == SBNN_OK);
  const std::string text = slurp("test_capi_grad.csv");
  std::remove("test_capi_grad.csv");
  size_t lines = 0;
  for (char ch : text) lines += ch == '\n';
  CHECK(lines >= 3);
  CHECK(sbnn_gradcheck(settings, 0, 1000, 1, "x.csv") == SBNN_ERR_CONFIG);
}
