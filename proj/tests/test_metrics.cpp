#include <cmath>
#include <random>

#include "doctest.h"
#include "edca/errors.hpp"
#include "edca/metrics.hpp"
#include "support.hpp"

using namespace edca;

namespace {

ConfusionMatrix binary(std::size_t tp, std::size_t fn, std::size_t fp, std::size_t tn) {
  // class 1 is positive
  ConfusionMatrix cm(2);
  cm(1, 1) = tp;
  cm(1, 0) = fn;
  cm(0, 1) = fp;
  cm(0, 0) = tn;
  return cm;
}

}  // namespace

TEST_CASE("mcc special cases") {
  ConfusionMatrix diag(3);
  diag(0, 0) = 4;
  diag(1, 1) = 2;
  diag(2, 2) = 7;
  CHECK(mcc(diag) == doctest::Approx(1.0));
  CHECK(mcc(binary(1, 1, 1, 1)) == doctest::Approx(0.0));
  CHECK(std::abs(mcc(binary(3, 2, 1, 4)) - 10.0 / std::sqrt(600.0)) < 1e-12);

  ConfusionMatrix constant(2);  // every row predicted class 0
  constant(0, 0) = 5;
  constant(1, 0) = 3;
  CHECK(mcc(constant) == 0.0);
}

TEST_CASE("mcc agrees with the indicator correlation oracle") {
  std::mt19937_64 gen(17);
  for (int k : {2, 3, 5}) {
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 2 + gen() % 49;
      std::vector<int> t(n), p(n);
      for (std::size_t i = 0; i < n; ++i) {
        t[i] = static_cast<int>(gen() % k);
        p[i] = gen() % 3 == 0 ? t[i] : static_cast<int>(gen() % k);
      }
      CHECK(std::abs(mcc(t, p, k) - edca_test::indicator_pearson(t, p, k)) < 1e-12);
    }
  }
}

TEST_CASE("accuracy") {
  CHECK(accuracy(binary(3, 2, 1, 4)) == doctest::Approx(0.7));
}

TEST_CASE("fitness mapping") {
  CHECK(fitness_from_mcc(1.0) == 0.0);
  CHECK(fitness_from_mcc(-1.0) == 1.0);
  CHECK(fitness_from_mcc(0.0) == 0.5);
  CHECK_THROWS_AS(fitness_from_mcc(1.5), ConfigError);
  CHECK_THROWS_AS(fitness_from_mcc(std::nan("")), ConfigError);
}

TEST_CASE("data usage") {
  Genome g;
  auto u = data_usage(g, 100, 10);
  CHECK(u.pct_instances == 1.0);
  CHECK(u.pct_features == 1.0);
  CHECK(u.pct_data == 1.0);

  g.is_gene = IndexSet(43);
  g.fs_gene = IndexSet(84);
  u = data_usage(g, 100, 100);
  CHECK(u.pct_data == doctest::Approx(0.3612));
  CHECK(std::abs(u.pct_data - 0.36) < 0.01);
  CHECK(std::abs(u.pct_data - 0.35) <= 0.06);

  g.is_gene = IndexSet(60);
  g.fs_gene = IndexSet(98);
  CHECK(std::abs(data_usage(g, 100, 100).pct_data - 0.59) < 0.005);
}

TEST_CASE("dr modes and histogram") {
  Genome g;
  CHECK(dr_mode(g) == DrMode::None);
  g.is_gene = IndexSet{1};
  CHECK(dr_mode(g) == DrMode::IsOnly);
  g.fs_gene = IndexSet{0};
  CHECK(dr_mode(g) == DrMode::IsFs);
  g.is_gene.reset();
  CHECK(dr_mode(g) == DrMode::FsOnly);
  CHECK(to_string(DrMode::IsFs) == "IS+FS");

  std::vector<DrMode> modes;
  for (int i = 0; i < 40; ++i) modes.push_back(kAllDrModes[i % 4 == 0 ? 3 : i % 2]);
  const auto h = dr_histogram(modes);
  CHECK(h[0] == 10);
  CHECK(h[1] == 20);
  CHECK(h[2] == 0);
  CHECK(h[3] == 10);
}
