#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "edca/errors.hpp"
#include "edca/learners.hpp"
#include "edca/metrics.hpp"
#include "support.hpp"

using namespace edca;

namespace {

std::vector<int> random_labels(std::size_t n, int k, std::mt19937_64& gen) {
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i < static_cast<std::size_t>(k) ? i : gen() % k);
  return y;
}

ConfiguredStep gene(std::string model, ParamMap p) { return {StepId::Model, std::move(model), std::move(p)}; }

// XOR on a 2-D grid with several copies of each corner.
void xor_fixture(Matrix& x, std::vector<int>& y) {
  x = Matrix(40, 2);
  y.assign(40, 0);
  for (std::size_t i = 0; i < 40; ++i) {
    const int a = static_cast<int>(i % 2), b = static_cast<int>((i / 2) % 2);
    x(i, 0) = a + 0.01 * static_cast<double>(i % 5);
    x(i, 1) = b + 0.01 * static_cast<double>(i % 7);
    y[i] = a ^ b;
  }
}

}  // namespace

TEST_CASE("softmax gradient matches central differences") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = edca_test::random_matrix(8, 3, gen);
    const auto y = random_labels(8, 3, gen);
    const auto w = edca_test::random_matrix(3, 4, gen, 0.5);
    const double l2 = 0.1;
    Matrix grad;
    softmax_loss_and_gradient(w, x, y, l2, &grad);
    const double h = 1e-6;
    for (std::size_t i = 0; i < w.data.size(); ++i) {
      auto wp = w, wm = w;
      wp.data[i] += h;
      wm.data[i] -= h;
      const double fd = (softmax_loss_and_gradient(wp, x, y, l2, nullptr) -
                         softmax_loss_and_gradient(wm, x, y, l2, nullptr)) / (2 * h);
      const double rel = std::abs(fd - grad.data[i]) / std::max(1.0, std::abs(fd));
      CHECK(rel < 1e-5);
    }
  }
}

TEST_CASE("logreg separates a linearly separable problem") {
  Matrix x(60, 2);
  std::vector<int> y(60);
  for (std::size_t i = 0; i < 60; ++i) {
    x(i, 0) = static_cast<double>(i) / 10.0 - 3.0;
    x(i, 1) = std::cos(static_cast<double>(i));
    y[i] = x(i, 0) > 0 ? 1 : 0;
  }
  const auto m = fit_model(gene("logreg", {{"learning_rate", 0.5}, {"l2", 1e-6}, {"epochs", std::int64_t{500}}}), x, y,
                           2, 0);
  CHECK(mcc(y, m.predict(x), 2) == doctest::Approx(1.0));
}

TEST_CASE("gaussian nb posteriors") {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix x(200, 1);
  std::vector<int> y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    y[i] = static_cast<int>(i % 2);
    x(i, 0) = nd(gen) + (y[i] ? 5.0 : -5.0);
  }
  const auto m = fit_model(gene("gnb", {{"var_smoothing", 1e-9}}), x, y, 2, 0);
  const auto p = m.predict_proba(x);
  for (std::size_t i = 0; i < p.rows; ++i) CHECK(std::abs(p(i, 0) + p(i, 1) - 1.0) < 1e-9);

  Matrix xt(100, 1);
  std::vector<int> yt(100);
  for (std::size_t i = 0; i < 100; ++i) {
    yt[i] = static_cast<int>(i % 2);
    xt(i, 0) = nd(gen) + (yt[i] ? 5.0 : -5.0);
  }
  CHECK(mcc(yt, m.predict(xt), 2) > 0.9);
}

TEST_CASE("knn k=1 recalls its training points") {
  std::mt19937_64 gen(2);
  const auto x = edca_test::random_matrix(30, 3, gen);
  const auto y = random_labels(30, 3, gen);
  for (const char* w : {"uniform", "distance"}) {
    const auto m = fit_model(gene("knn", {{"k", std::int64_t{1}}, {"weights", std::string(w)}}), x, y, 3, 0);
    CHECK(accuracy(ConfusionMatrix(y, m.predict(x), 3)) == 1.0);
  }
  const auto big = fit_model(gene("knn", {{"k", std::int64_t{25}}, {"weights", std::string("uniform")}}),
                             edca_test::random_matrix(5, 2, gen), std::vector<int>{0, 1, 0, 1, 0}, 2, 0);
  CHECK(as_int(big.hyperparameters().at("k")) == 5);
}

TEST_CASE("a depth-one tree cannot fit xor") {
  Matrix x;
  std::vector<int> y;
  xor_fixture(x, y);

  // Brute force: no axis-aligned threshold yields a better-than-chance stump.
  double best_split_mcc = 0.0;
  for (std::size_t f = 0; f < 2; ++f) {
    for (std::size_t r = 0; r < x.rows; ++r) {
      std::vector<int> pred(x.rows);
      for (std::size_t i = 0; i < x.rows; ++i) pred[i] = x(i, f) <= x(r, f) ? 1 : 0;
      best_split_mcc = std::max(best_split_mcc, std::abs(mcc(y, pred, 2)));
    }
  }
  CHECK(best_split_mcc < 0.25);

  const auto stump = fit_model(gene("dtree", {{"criterion", std::string("gini")},
                                              {"max_depth", std::int64_t{1}},
                                              {"min_samples_split", std::int64_t{2}}}),
                               x, y, 2, 0);
  CHECK(std::abs(mcc(y, stump.predict(x), 2)) < 0.25);

  const auto deep = fit_model(gene("dtree", {{"criterion", std::string("entropy")},
                                             {"max_depth", std::int64_t{4}},
                                             {"min_samples_split", std::int64_t{2}}}),
                              x, y, 2, 0);
  CHECK(mcc(y, deep.predict(x), 2) == doctest::Approx(1.0));
}

TEST_CASE("single-tree forest without bootstrap equals a tree") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = edca_test::random_matrix(40, 4, gen);
    const auto y = random_labels(40, 3, gen);
    const auto tree = fit_model(gene("dtree", {{"criterion", std::string("gini")},
                                               {"max_depth", std::int64_t{6}},
                                               {"min_samples_split", std::int64_t{2}}}),
                                x, y, 3, 1);
    const auto forest = fit_model(gene("rforest", {{"n_estimators", std::int64_t{1}},
                                                   {"max_depth", std::int64_t{6}},
                                                   {"criterion", std::string("gini")},
                                                   {"max_features", std::string("all")},
                                                   {"bootstrap", std::string("false")}}),
                                  x, y, 3, 1);
    CHECK(std::get<ForestParams>(forest.params()).trees.front() == std::get<TreeParams>(tree.params()));
    const auto xt = edca_test::random_matrix(25, 4, gen);
    CHECK(forest.predict(xt) == tree.predict(xt));
  }
}

TEST_CASE("single-class training fails") {
  Matrix x(4, 1, 1.0);
  const std::vector<int> y{1, 1, 1, 1};
  CHECK_THROWS_AS(fit_model(gene("gnb", {{"var_smoothing", 1e-9}}), x, y, 2, 0), PipelineFailure);
}

TEST_CASE("model sampling") {
  const auto space = default_model_space();
  Rng rng(3);
  std::map<std::string, int> counts;
  for (int i = 0; i < 10000; ++i) {
    const auto g = sample_model_gene(space, rng);
    ++counts[g.method];
    if (g.method == "logreg") {
      const double lr = as_double(g.params.at("learning_rate"));
      CHECK(lr >= 1e-4);
      CHECK(lr <= 1.0);
    }
  }
  REQUIRE(counts.size() == 5);
  for (const auto& [id, c] : counts) CHECK(std::abs(c / 10000.0 - 0.2) < 0.02);

  Rng a(8), b(8);
  CHECK(sample_model_gene(space, a) == sample_model_gene(space, b));
}

TEST_CASE("fitted models survive json round trip") {
  std::mt19937_64 gen(4);
  const auto x = edca_test::random_matrix(30, 3, gen);
  const auto y = random_labels(30, 3, gen);
  const auto space = default_model_space();
  Rng rng(1);
  for (const auto& entry : space.entries) {
    const auto m = fit_model({StepId::Model, entry.name, entry.sample(rng)}, x, y, 3, 7);
    const auto back = FittedModel::from_json(m.to_json());
    CHECK(back.to_json() == m.to_json());
    CHECK(back.predict(x) == m.predict(x));
  }
}
