#include <cmath>

#include "doctest.h"
#include "edca/errors.hpp"
#include "edca/evolution.hpp"
#include "edca/metrics.hpp"
#include "edca/pipeline.hpp"
#include "support.hpp"

using namespace edca;
using edca_test::iota_rows;
using edca_test::num_column;
using edca_test::text_column;

namespace {

Frame numeric_frame(const std::vector<double>& v) {
  Frame f;
  f.rows = v.size();
  f.columns.push_back({"x", ColumnKind::Numerical, true, v, {}});
  return f;
}

ConfiguredStep step(StepId id, std::string method) { return {id, std::move(method), {}}; }

ConfiguredStep tree_gene() {
  return {StepId::Model, "dtree",
          {{"criterion", std::string("gini")}, {"max_depth", std::int64_t{8}}, {"min_samples_split", std::int64_t{2}}}};
}

ConfiguredStep logreg_gene() {
  return {StepId::Model, "logreg",
          {{"learning_rate", 0.3}, {"l2", 1e-6}, {"epochs", std::int64_t{300}}}};
}

Dataset australian_like(std::size_t n) {
  std::vector<Column> cols;
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 2);
  for (int j = 0; j < 14; ++j) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(static_cast<double>(i * 31 + j)) + (j < 3 ? 3.0 * y[i] : 0.0);
    cols.push_back(num_column("A" + std::to_string(j + 1), v));
  }
  return Dataset(cols, y, {"0", "1"});
}

Genome genome_for(const Blueprint& bp, std::vector<std::string> methods, ConfiguredStep model) {
  Genome g;
  for (std::size_t i = 0; i < bp.prep_step_count(); ++i) g.prep_genes.push_back(step(bp.steps[i].step, methods.at(i)));
  g.model_gene = std::move(model);
  return g;
}

}  // namespace

TEST_CASE("standard scaler uses population deviation") {
  auto f = numeric_frame({1, 2, 3});
  const auto st = fit_step(step(StepId::Scale, "standard"), f);
  const auto& a = std::get<ScalerState>(st.state).columns.at("x");
  CHECK(a.center == doctest::Approx(2.0));
  CHECK(a.scale == doctest::Approx(std::sqrt(2.0 / 3.0)));
  apply_step(st, f);
  CHECK(f.columns[0].values[0] == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(f.columns[0].values[1] == doctest::Approx(0.0));
  CHECK(f.columns[0].values[2] == doctest::Approx(1.2247).epsilon(1e-4));
}

TEST_CASE("minmax on a constant column maps to zero") {
  auto f = numeric_frame({5, 5});
  apply_step(fit_step(step(StepId::Scale, "minmax"), f), f);
  CHECK(f.columns[0].values == std::vector<double>{0.0, 0.0});
}

TEST_CASE("median imputer") {
  auto f = numeric_frame({1, std::nan(""), 3});
  apply_step(fit_step(step(StepId::ImputeNumerical, "median"), f), f);
  CHECK(f.columns[0].values[1] == 2.0);
}

TEST_CASE("one-hot encoder keeps training categories") {
  Frame f;
  f.rows = 4;
  f.columns.push_back({"c", ColumnKind::Categorical, false, {}, {"b", "a", "c", "a"}});
  const auto st = fit_step(step(StepId::Encode, "onehot"), f);
  CHECK(std::get<EncoderState>(st.state).categories.at("c") == std::vector<std::string>{"a", "b", "c"});

  Frame g;
  g.rows = 2;
  g.columns.push_back({"c", ColumnKind::Categorical, false, {}, {"zzz", "c"}});
  apply_step(st, g);
  REQUIRE(g.columns.size() == 3);
  for (const auto& col : g.columns) CHECK(col.values[0] == 0.0);
  CHECK(g.columns[2].values[1] == 1.0);
}

TEST_CASE("apply_dr selections") {
  const std::vector<std::size_t> train{10, 11, 12, 13, 14, 15};
  Genome g;
  auto sel = apply_dr(g, train, 4);
  CHECK(sel.rows == RowIndices(train.begin(), train.end()));
  CHECK(sel.features == std::vector<std::size_t>{0, 1, 2, 3});
  g.is_gene = IndexSet{0, 2, 4};
  CHECK(apply_dr(g, train, 4).rows == RowIndices{10, 12, 14});

  g.is_gene.reset();
  g.fs_gene = IndexSet(168);
  for (std::size_t i = 0; i < 168; ++i) (*g.fs_gene)[i] = i;
  CHECK(apply_dr(g, train, 216).features.size() / 216.0 == doctest::Approx(0.78).epsilon(0.01));
}

TEST_CASE("standard scaling with logistic regression on numeric data") {
  const auto ds = australian_like(120);
  const auto rows = iota_rows(120);
  const auto bp = analyze(ds, rows);
  REQUIRE(bp.prep_step_count() == 1);
  auto g = genome_for(bp, {"standard"}, logreg_gene());
  g.is_gene = IndexSet{};
  for (std::size_t i = 0; i < 120; i += 2) g.is_gene->push_back(i);
  g.is_gene->push_back(1);
  std::sort(g.is_gene->begin(), g.is_gene->end());
  const auto fp = fit_pipeline(g, bp, ds, rows, 0);

  // scaler statistics come from the selected rows only
  double mean = 0;
  for (auto r : *g.is_gene) mean += std::get<double>(ds.column(0).cells[r]);
  mean /= static_cast<double>(g.is_gene->size());
  const auto& a = std::get<ScalerState>(fp.steps()[0].state).columns.at("A1");
  CHECK(a.center == doctest::Approx(mean));
  CHECK(mcc(ds.target(), fp.predict(ds), 2) > 0.9);
}

TEST_CASE("instance selection on australian-shaped data") {
  const auto ds = australian_like(690);
  const auto rows = iota_rows(690);
  const auto bp = analyze(ds, rows);
  auto g = genome_for(bp, {"minmax"}, tree_gene());
  g.is_gene = IndexSet{};
  for (std::size_t i = 0; i < 690; i += 3) g.is_gene->push_back(i);
  g.is_gene->push_back(1);
  std::sort(g.is_gene->begin(), g.is_gene->end());
  const auto fp = fit_pipeline(g, bp, ds, rows, 0);
  const auto d = fp.training_dims();
  CHECK(static_cast<double>(d.rows_used) / static_cast<double>(d.max_instances) == doctest::Approx(0.33).epsilon(0.02));
  CHECK(fp.to_json()["Scaler"] == "minmax");
  CHECK(fp.predict(ds, std::vector<std::size_t>{}).empty());
}

TEST_CASE("mixed pipeline: imputation, encoding, identifiers, round trip") {
  SyntheticSpec s;
  s.n_rows = 240;
  s.with_identifier = true;
  s.missing_rate = 0.08;
  s.n_classes = 3;
  s.class_sep = 4.0;
  const auto ds = generate_synthetic(s, 5);
  const auto split = split_holdout(ds, 0.25, true, 1);
  const auto bp = analyze(ds, split.train);
  REQUIRE(bp.has_step(StepId::DropIdentifiers));
  REQUIRE(bp.has_step(StepId::Encode));

  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    GAConfig cfg;
    const auto g = random_genome(bp, cfg, rng);
    const auto fp = fit_pipeline(g, bp, ds, split.train, 9);
    const auto pred = fp.predict(ds, split.val);
    CHECK(pred.size() == split.val.size());
    const auto j = fp.to_json();
    CHECK(j["dropped_identifiers"] == nlohmann::ordered_json::array({"id"}));
    const auto back = FittedPipeline::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.predict(ds, split.val) == pred);
  }
}

TEST_CASE("validation missing values use the learned statistic") {
  std::vector<double> x{1.5, 2.5, 3.5, 4.5, 100, 5.5, 6.5, 7.5};
  const std::vector<int> y{0, 1, 0, 1, 0, 1, 0, 1};
  x[4] = std::nan("");
  const Dataset ds({num_column("x", x), num_column("z", {0, 1, 0, 1, 0, 1, 0, 1})}, y, {"a", "b"});
  const std::vector<std::size_t> train{0, 1, 2, 3, 5, 6, 7};
  const auto bp = analyze(ds, std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7});
  REQUIRE(bp.has_step(StepId::ImputeNumerical));
  auto g = genome_for(bp, {"mean", "standard"}, tree_gene());
  g.fs_gene = IndexSet{0};
  const auto fp = fit_pipeline(g, bp, ds, train, 0);
  const auto& fill = std::get<ImputerState>(fp.steps()[0].state).numeric_fill.at("x");
  CHECK(fill == doctest::Approx(31.5 / 7.0));
  const auto m = fp.transform(ds, std::vector<std::size_t>{4});
  const auto& sc = std::get<ScalerState>(fp.steps()[1].state).columns.at("x");
  CHECK(m(0, 0) == doctest::Approx((fill - sc.center) / sc.scale));
}

TEST_CASE("mismatched genome and schema errors") {
  const auto ds = australian_like(40);
  const auto bp = analyze(ds, iota_rows(40));
  Genome g;
  g.model_gene = tree_gene();
  CHECK_THROWS_AS(fit_pipeline(g, bp, ds, iota_rows(40), 0), PipelineFailure);

  const auto fp = fit_pipeline(genome_for(bp, {"robust"}, tree_gene()), bp, ds, iota_rows(40), 0);
  const Dataset other({num_column("A1", {1, 2})}, {0, 1}, {"0", "1"});
  CHECK_THROWS_AS(fp.predict(other), DataError);
}
