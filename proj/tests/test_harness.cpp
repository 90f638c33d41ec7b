#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "edca/errors.hpp"
#include "edca/harness.hpp"
#include "support.hpp"

using namespace edca;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_config() {
  RunConfig c;
  SyntheticSpec s;
  s.n_rows = 120;
  s.n_numerical = 3;
  s.n_categorical = 1;
  s.n_binary = 1;
  s.missing_rate = 0.03;
  s.class_sep = 3.0;
  c.synthetic = s;
  c.synthetic_seed = 2;
  c.ga.population_size = 5;
  c.ga.max_evaluations = 5;
  c.ga.parallel_jobs = 1;
  c.n_runs = 2;
  c.outer_cv_k = 3;
  c.seed = 21;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("edca_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("thirty runs of five folds give 150 records") {
  auto cfg = tiny_config();
  cfg.n_runs = 30;
  cfg.outer_cv_k = 5;
  cfg.ga.population_size = 3;
  cfg.ga.max_evaluations = 3;
  const auto report = run_experiment(cfg);
  REQUIRE(report.records.size() == 150);

  double sum = 0;
  for (const auto& r : report.records) sum += r.test_mcc;
  const auto aggs = report.aggregates();
  CHECK(aggs.at("test_mcc").count == 150);
  CHECK(aggs.at("test_mcc").mean == doctest::Approx(sum / 150.0).epsilon(1e-12));

  const auto h = report.dr_histogram();
  CHECK(h[0] + h[1] + h[2] + h[3] == 150);
  for (const auto& r : report.records) {
    CHECK(std::abs(r.usage.pct_data - r.usage.pct_instances * r.usage.pct_features) < 1e-12);
  }
}

TEST_CASE("sample standard deviation aggregate") {
  const std::vector<double> v{1, 2, 3, 4};
  const auto a = aggregate(v);
  CHECK(a.mean == doctest::Approx(2.5));
  CHECK(a.stdev == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("edca and random search see identical folds") {
  auto cfg = tiny_config();
  const auto a = run_experiment(cfg);
  cfg.searcher = "random";
  const auto b = run_experiment(cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].run == b.records[i].run);
    CHECK(a.records[i].fold == b.records[i].fold);
    // identical test rows: the pipelines were evaluated on the same split
    CHECK(a.records[i].pipeline["training_dims"]["max_instances"] ==
          b.records[i].pipeline["training_dims"]["max_instances"]);
  }
}

TEST_CASE("emitted files are reproducible") {
  auto cfg = tiny_config();
  cfg.retrain_all = true;
  const auto report = run_experiment(cfg);
  const auto d1 = scratch("emit1"), d2 = scratch("emit2");
  emit_reports(report, d1);
  emit_reports(report, d2);
  for (const char* f : {"report.json", "dr_histogram.csv", "evaluations.csv", "history.csv", "summary.md",
                        "pipelines/best_pipeline_r0_f0.json", "pipelines/retrained_pipeline_r1_f2.json"}) {
    CHECK_MESSAGE(slurp(d1 / f) == slurp(d2 / f), f);
    CHECK_FALSE(slurp(d1 / f).empty());
  }
  const auto pj = nlohmann::ordered_json::parse(slurp(d1 / "pipelines/best_pipeline_r0_f0.json"));
  for (const char* key : {"%I", "%F", "Imp", "Scaler", "Encoder", "Model"}) CHECK(pj.contains(key));

  std::ifstream hist(d1 / "dr_histogram.csv");
  std::string line;
  std::getline(hist, line);
  std::size_t total = 0;
  while (std::getline(hist, line)) total += std::stoul(line.substr(line.find(',') + 1));
  CHECK(total == cfg.n_runs * cfg.outer_cv_k);

  // a second experiment with the same config reproduces report.json
  const auto d3 = scratch("emit3");
  emit_reports(run_experiment(cfg), d3);
  CHECK(slurp(d1 / "report.json") == slurp(d3 / "report.json"));
  fs::remove_all(d1);
  fs::remove_all(d2);
  fs::remove_all(d3);
}

TEST_CASE("retraining drops the instance gene") {
  const auto ds = generate_synthetic(tiny_config().synthetic.value(), 3);
  const auto rows = edca_test::iota_rows(ds.n_rows());
  const auto split = split_holdout(ds, 0.25, true, 1);
  const auto bp = analyze(ds, split.train);
  GAConfig cfg;
  cfg.p_dr_gene_init = 1.0;
  Rng rng(4);
  auto g = random_genome(bp, cfg, rng);
  g.is_gene->resize(std::max<std::size_t>(min_instance_count(bp), g.is_gene->size() * 43 / 100));
  g = repair(g, bp, rng);

  const auto fp = retrain_all(g, bp, ds, rows, 0);
  CHECK(fp.training_dims().rows_used == ds.n_rows());
  CHECK(fp.training_dims().features_used == g.fs_gene->size());
  const auto both = retrain_all(g, bp, ds, rows, 0, RetrainMode::Both);
  CHECK(both.training_dims().features_used == bp.max_features);

  Genome plain = g;
  plain.is_gene.reset();
  plain.fs_gene.reset();
  CHECK(retrain_all(plain, bp, ds, rows, 0).to_json()["training_dims"]["rows_used"] == ds.n_rows());
}

TEST_CASE("retrained models stay close on a separable fixture") {
  std::vector<double> deltas;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto cfg = tiny_config();
    cfg.synthetic->class_sep = 5.0;
    cfg.synthetic->n_rows = 200;
    cfg.n_runs = 1;
    cfg.outer_cv_k = 1;
    cfg.retrain_all = true;
    cfg.ga.population_size = 10;
    cfg.ga.max_evaluations = 30;
    cfg.seed = seed;
    const auto rep = run_experiment(cfg);
    deltas.push_back(rep.records[0].retrained_mcc.value() - rep.records[0].test_mcc);
  }
  std::sort(deltas.begin(), deltas.end());
  CHECK(deltas[2] >= -0.05);
}

TEST_CASE("run config parsing") {
  const auto j = nlohmann::ordered_json::parse(R"({"data": "d.csv", "target": "y", "n_runs": 2,
      "ga": {"population_size": 8}, "retrain_all_mode": "both"})");
  const auto c = run_config_from_json(j, "/tmp/base");
  CHECK(c.data_path.value() == fs::path("/tmp/base/d.csv"));
  CHECK(c.ga.population_size == 8);
  CHECK(c.retrain_mode == RetrainMode::Both);
  CHECK_THROWS_AS(run_config_from_json({{"nruns", 2}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json({{"data", "x.csv"}, {"searcher", "grid"}}).validate(), ConfigError);
  RunConfig none;
  CHECK_THROWS_AS(none.validate(), ConfigError);
}
