#include <algorithm>
#include <set>

#include "doctest.h"
#include "edca/dataset.hpp"
#include "edca/errors.hpp"
#include "edca/learners.hpp"
#include "edca/metrics.hpp"
#include "support.hpp"

using namespace edca;

namespace {

std::string wide_csv(std::size_t rows, std::size_t cols) {
  std::string s;
  for (std::size_t c = 0; c < cols; ++c) s += "A" + std::to_string(c + 1) + ",";
  s += "A15\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) s += std::to_string((r * 7 + c) % 13) + ".5,";
    s += (r % 3 == 0 ? "1\n" : "0\n");
  }
  return s;
}

}  // namespace

TEST_CASE("csv loading keeps shape and label count") {
  const auto ds = parse_csv(wide_csv(690, 14), "A15");
  CHECK(ds.n_rows() == 690);
  CHECK(ds.n_columns() == 14);
  CHECK(ds.n_classes() == 2);
}

TEST_CASE("missing tokens become Missing cells") {
  const auto ds = parse_csv("age,y\n25,a\n?,b\n40,a\n", "y", {"?"});
  const auto& age = ds.column(0);
  CHECK(age.type == ColumnType::Number);
  CHECK(std::get<double>(age.cells[0]) == 25.0);
  CHECK(is_missing(age.cells[1]));
  CHECK(std::get<double>(age.cells[2]) == 40.0);
}

TEST_CASE("csv errors") {
  CHECK_THROWS_AS(parse_csv("x,y\n1,a\n2,a\n", "y"), DataError);          // one class
  CHECK_THROWS_AS(parse_csv("x,y\n1,a\n2,b\n", "z"), DataError);          // no target column
  CHECK_THROWS_AS(parse_csv("x,y\n1,a\nfoo,b\n", "y"), DataError);        // mixed column
  CHECK_THROWS_AS(parse_csv("x,y\n1,a\n2\n", "y"), DataError);            // ragged row
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", "y"), DataError);
}

TEST_CASE("quoted fields and csv round trip") {
  const auto ds = parse_csv("name,v,y\n\"a,b\",1.25,p\n\"say \"\"hi\"\"\",,q\n", "y");
  CHECK(std::get<std::string>(ds.column(0).cells[0]) == "a,b");
  CHECK(std::get<std::string>(ds.column(0).cells[1]) == "say \"hi\"");
  CHECK(is_missing(ds.column(1).cells[1]));
  CHECK(parse_csv(to_csv(ds, "y"), "y") == ds);
}

TEST_CASE("holdout split sizes and determinism") {
  std::vector<int> labels(1000);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 4 == 0);
  const auto s = split_holdout(labels, 0.25, true, 11);
  CHECK(s.train.size() == 750);
  CHECK(s.val.size() == 250);
  CHECK(split_holdout(labels, 0.25, true, 11) == s);
  CHECK(split_holdout(labels, 0.25, false, 11).val.size() == 250);

  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  CHECK(all.size() == 1000);

  const std::vector<int> tiny{0, 1, 0, 1};
  const auto t = split_holdout(tiny, 0.5, true, 3);
  for (const auto* part : {&t.train, &t.val}) {
    REQUIRE(part->size() == 2);
    CHECK(tiny[(*part)[0]] != tiny[(*part)[1]]);
  }
}

TEST_CASE("kfold partitions rows") {
  std::vector<int> labels(2000);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 10);
  const auto folds = kfold(labels, 5, true, 5);
  REQUIRE(folds.size() == 5);
  std::vector<int> seen(2000, 0);
  for (const auto& f : folds) {
    CHECK(f.val.size() == 400);
    CHECK(f.train.size() == 1600);
    for (auto r : f.val) ++seen[r];
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

TEST_CASE("stratified kfold on 6/4 classes") {
  const std::vector<int> labels{0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (const auto& f : kfold(labels, 2, true, seed)) {
      const auto a = std::count_if(f.val.begin(), f.val.end(), [&](std::size_t r) { return labels[r] == 0; });
      CHECK(a == 3);
      CHECK(f.val.size() - a == 2);
    }
  }
}

TEST_CASE("synthetic generator shape") {
  SyntheticSpec s;
  s.n_rows = 600;
  s.n_numerical = 6;
  s.n_categorical = 3;
  s.n_binary = 1;
  s.with_identifier = true;
  s.missing_rate = 0.05;
  s.n_classes = 3;
  const auto ds = generate_synthetic(s, 1);
  CHECK(ds.n_columns() == 11);
  CHECK(ds.n_classes() == 3);
  std::size_t missing = 0, cells = 0;
  for (const auto& c : ds.columns()) {
    if (c.name == "id") {
      CHECK(std::none_of(c.cells.begin(), c.cells.end(), is_missing));
      continue;
    }
    for (const auto& cell : c.cells) missing += is_missing(cell);
    cells += c.cells.size();
  }
  const double rate = static_cast<double>(missing) / static_cast<double>(cells);
  CHECK(rate > 0.035);
  CHECK(rate < 0.065);

  s.missing_rate = 0.0;
  const auto clean = generate_synthetic(s, 1);
  for (const auto& c : clean.columns()) {
    CHECK(std::none_of(c.cells.begin(), c.cells.end(), is_missing));
  }
  CHECK(generate_synthetic(s, 9) == generate_synthetic(s, 9));
}

TEST_CASE("well separated synthetic data is 1-NN separable") {
  SyntheticSpec s;
  s.n_rows = 400;
  s.n_numerical = 2;
  s.n_categorical = 0;
  s.n_binary = 0;
  s.class_sep = 12.0;
  const auto ds = generate_synthetic(s, 4);
  const auto split = split_holdout(ds, 0.25, true, 2);
  auto matrix = [&](const RowIndices& rows) {
    Matrix m(rows.size(), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < 2; ++j) m(i, j) = std::get<double>(ds.column(j).cells[rows[i]]);
    }
    return m;
  };
  std::vector<int> ytr, yte;
  for (auto r : split.train) ytr.push_back(ds.target()[r]);
  for (auto r : split.val) yte.push_back(ds.target()[r]);
  const auto model = fit_model({StepId::Model, "knn", {{"k", std::int64_t{1}}, {"weights", std::string("uniform")}}},
                               matrix(split.train), ytr, 2, 0);
  CHECK(mcc(yte, model.predict(matrix(split.val)), 2) > 0.9);
}
