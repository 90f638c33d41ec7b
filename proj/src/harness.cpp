#include "edca/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "edca/analyzer.hpp"
#include "edca/errors.hpp"

namespace edca {

using json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kOuterSplit = 1;
constexpr std::uint64_t kInnerSplit = 2;
constexpr std::uint64_t kSearch = 3;

SyntheticSpec synthetic_from_json(const json& j) {
  SyntheticSpec s;
  s.n_rows = j.value("n_rows", s.n_rows);
  s.n_numerical = j.value("n_numerical", s.n_numerical);
  s.n_noise = j.value("n_noise", s.n_noise);
  s.n_categorical = j.value("n_categorical", s.n_categorical);
  s.n_binary = j.value("n_binary", s.n_binary);
  s.with_identifier = j.value("with_identifier", s.with_identifier);
  s.missing_rate = j.value("missing_rate", s.missing_rate);
  s.n_classes = j.value("n_classes", s.n_classes);
  s.class_sep = j.value("class_sep", s.class_sep);
  return s;
}

json synthetic_json(const SyntheticSpec& s) {
  return {{"n_rows", s.n_rows},         {"n_numerical", s.n_numerical},
          {"n_noise", s.n_noise},       {"n_categorical", s.n_categorical},
          {"n_binary", s.n_binary},     {"with_identifier", s.with_identifier},
          {"missing_rate", s.missing_rate}, {"n_classes", s.n_classes},
          {"class_sep", s.class_sep}};
}

std::vector<int> labels_of(const Dataset& ds, std::span<const std::size_t> rows) {
  std::vector<int> y;
  y.reserve(rows.size());
  for (auto r : rows) y.push_back(ds.target()[r]);
  return y;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void RunConfig::validate() const {
  ga.validate();
  if (n_runs < 1) throw ConfigError("n_runs must be >= 1");
  if (outer_cv_k == 0) throw ConfigError("outer_cv_k must be >= 1 (1 = holdout)");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must lie in (0, 1)");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  if (searcher != "edca" && searcher != "random") throw ConfigError("searcher must be 'edca' or 'random'");
  if (!data_path && !synthetic) throw ConfigError("config names neither a data file nor a synthetic spec");
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  static const std::set<std::string> known{"data",       "synthetic",  "target",       "missing_tokens",
                                           "ga",         "outer_cv_k", "test_fraction", "n_runs",
                                           "val_fraction", "stratified", "searcher",   "retrain_all",
                                           "retrain_all_mode", "output_dir", "seed"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");
  }
  RunConfig c;
  try {
    if (j.contains("data") && !j["data"].is_null()) {
      std::filesystem::path p = j["data"].get<std::string>();
      c.data_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    if (j.contains("synthetic") && !j["synthetic"].is_null()) {
      c.synthetic = synthetic_from_json(j["synthetic"]);
      c.synthetic_seed = j["synthetic"].value("seed", std::uint64_t{0});
    }
    c.target = j.value("target", c.target);
    if (j.contains("missing_tokens")) c.missing_tokens = j["missing_tokens"].get<std::set<std::string>>();
    if (j.contains("ga")) c.ga = ga_config_from_json(j["ga"]);
    c.outer_cv_k = j.value("outer_cv_k", c.outer_cv_k);
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.n_runs = j.value("n_runs", c.n_runs);
    c.val_fraction = j.value("val_fraction", c.val_fraction);
    c.stratified = j.value("stratified", c.stratified);
    c.searcher = j.value("searcher", c.searcher);
    c.retrain_all = j.value("retrain_all", c.retrain_all);
    const auto mode = j.value("retrain_all_mode", std::string("instances"));
    if (mode != "instances" && mode != "both") throw ConfigError("retrain_all_mode must be 'instances' or 'both'");
    c.retrain_mode = mode == "both" ? RetrainMode::Both : RetrainMode::Instances;
    if (j.contains("output_dir")) {
      std::filesystem::path p = j["output_dir"].get<std::string>();
      c.output_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

json to_json(const RunConfig& c) {
  json synth = nullptr;
  if (c.synthetic) {
    synth = synthetic_json(*c.synthetic);
    synth["seed"] = c.synthetic_seed;
  }
  return {{"data", c.data_path ? json(c.data_path->filename().string()) : json(nullptr)},
          {"synthetic", synth},
          {"target", c.target},
          {"missing_tokens", c.missing_tokens},
          {"ga", to_json(c.ga)},
          {"outer_cv_k", c.outer_cv_k},
          {"test_fraction", c.test_fraction},
          {"n_runs", c.n_runs},
          {"val_fraction", c.val_fraction},
          {"stratified", c.stratified},
          {"searcher", c.searcher},
          {"retrain_all", c.retrain_all},
          {"retrain_all_mode", c.retrain_mode == RetrainMode::Both ? "both" : "instances"},
          {"seed", c.seed}};
}

Aggregate aggregate(std::span<const double> values) {
  Aggregate a;
  a.count = values.size();
  if (values.empty()) return a;
  double s = 0.0;
  for (double v : values) s += v;
  a.mean = s / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.stdev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return a;
}

std::map<std::string, Aggregate> RunReport::aggregates() const {
  std::map<std::string, std::vector<double>> cols;
  for (const auto& r : records) {
    if (r.failure) continue;
    cols["test_mcc"].push_back(r.test_mcc);
    cols["test_accuracy"].push_back(r.test_accuracy);
    cols["best_fitness"].push_back(r.best_fitness);
    cols["pct_instances"].push_back(r.usage.pct_instances);
    cols["pct_features"].push_back(r.usage.pct_features);
    cols["pct_data"].push_back(r.usage.pct_data);
    cols["total_evaluations"].push_back(static_cast<double>(r.total_evaluations));
    cols["restarts"].push_back(static_cast<double>(r.restarts));
    if (r.retrained_mcc) cols["retrained_mcc"].push_back(*r.retrained_mcc);
  }
  std::map<std::string, Aggregate> out;
  for (const auto& [k, v] : cols) out[k] = aggregate(v);
  return out;
}

std::array<std::size_t, 4> RunReport::dr_histogram() const {
  std::vector<DrMode> modes;
  for (const auto& r : records) {
    if (!r.failure) modes.push_back(r.mode);
  }
  return edca::dr_histogram(modes);
}

json RunReport::to_json() const {
  json recs = json::array();
  for (const auto& r : records) {
    json j = {{"run", r.run}, {"fold", r.fold}, {"searcher", r.searcher}};
    if (r.failure) {
      j["failure"] = *r.failure;
      recs.push_back(std::move(j));
      continue;
    }
    j["test_mcc"] = r.test_mcc;
    j["test_accuracy"] = r.test_accuracy;
    j["best_fitness"] = r.best_fitness;
    j["pct_instances"] = r.usage.pct_instances;
    j["pct_features"] = r.usage.pct_features;
    j["pct_data"] = r.usage.pct_data;
    j["dr_mode"] = to_string(r.mode);
    j["total_evaluations"] = r.total_evaluations;
    j["restarts"] = r.restarts;
    j["retrained_mcc"] = optional_number(r.retrained_mcc);
    if (r.retrain_failure) j["retrain_failure"] = *r.retrain_failure;
    // %I/%F here use the fold-level denominators, like pct_*; the pipeline
    // file itself reports fractions of the rows it was fitted on.
    j["best_pipeline"] = {{"%I", r.usage.pct_instances}, {"%F", r.usage.pct_features},
                          {"Imp", r.pipeline.value("Imp", json::array())},
                          {"Scaler", r.pipeline.value("Scaler", json(nullptr))},
                          {"Encoder", r.pipeline.value("Encoder", json(nullptr))},
                          {"Model", r.pipeline.value("Model", json(nullptr))}};
    j["best_genome"] = edca::to_json(r.best_genome);
    recs.push_back(std::move(j));
  }
  json aggs = json::object();
  for (const auto& [k, a] : aggregates()) aggs[k] = {{"count", a.count}, {"mean", a.mean}, {"std", a.stdev}};
  json hist = json::object();
  const auto h = dr_histogram();
  for (std::size_t i = 0; i < kAllDrModes.size(); ++i) hist[to_string(kAllDrModes[i])] = h[i];
  return {{"artifact", {{"name", "edca"}, {"version", kArtifactVersion}}},
          {"seed", config.seed},
          {"config", edca::to_json(config)},
          {"records", recs},
          {"aggregates", aggs},
          {"dr_histogram", hist}};
}

FittedPipeline retrain_all(const Genome& best, const Blueprint& blueprint, const Dataset& ds,
                           std::span<const std::size_t> full_train, std::uint64_t seed, RetrainMode mode) {
  Genome g = best;
  g.is_gene.reset();
  if (mode == RetrainMode::Both) g.fs_gene.reset();
  return fit_pipeline(g, blueprint, ds, full_train, seed);
}

Dataset load_configured_dataset(const RunConfig& cfg) {
  if (cfg.data_path) return load_csv(*cfg.data_path, cfg.target, cfg.missing_tokens);
  if (cfg.synthetic) return generate_synthetic(*cfg.synthetic, cfg.synthetic_seed);
  throw ConfigError("config names neither a data file nor a synthetic spec");
}

RunReport run_experiment(const RunConfig& cfg) { return run_experiment(cfg, load_configured_dataset(cfg)); }

RunReport run_experiment(const RunConfig& cfg, const Dataset& ds) {
  cfg.validate();
  RunReport report;
  report.config = cfg;
  const auto k = static_cast<std::size_t>(ds.n_classes());

  for (std::size_t run = 0; run < cfg.n_runs; ++run) {
    const auto outer_seed = derive_seed(cfg.seed, {run, kOuterSplit});
    std::vector<SplitPair> outer;
    if (cfg.outer_cv_k >= 2) {
      outer = kfold(ds, cfg.outer_cv_k, cfg.stratified, outer_seed);
    } else {
      outer.push_back(split_holdout(ds, cfg.test_fraction, cfg.stratified, outer_seed));
    }

    for (std::size_t fold = 0; fold < outer.size(); ++fold) {
      RunRecord rec;
      rec.run = run;
      rec.fold = fold;
      rec.searcher = cfg.searcher;
      const auto& outer_train = outer[fold].train;
      const auto& test = outer[fold].val;
      try {
        const auto outer_labels = labels_of(ds, outer_train);
        const auto inner = split_holdout(outer_labels, cfg.val_fraction, cfg.stratified,
                                         derive_seed(cfg.seed, {run, fold, kInnerSplit}));
        const auto train = remap(inner.train, outer_train);
        const auto val = remap(inner.val, outer_train);

        const Blueprint bp = analyze(ds, train);
        GAConfig ga = cfg.ga;
        ga.seed = derive_seed(cfg.seed, {run, fold, kSearch});
        const auto result = cfg.searcher == "random" ? random_search(bp, ds, train, val, ga)
                                                     : evolve(bp, ds, train, val, ga);

        rec.best_fitness = result.best.fitness;
        rec.best_genome = result.best.genome;
        rec.mode = result.best_mode;
        rec.total_evaluations = result.total_evaluations;
        rec.restarts = result.restarts;
        rec.wall_time = result.wall_time;
        rec.history = result.history;
        rec.usage = data_usage(result.best.genome, outer_train.size(), bp.max_features);

        const auto truth = labels_of(ds, test);
        try {
          auto fp = fit_pipeline(result.best.genome, bp, ds, train, result.best.eval_seed);
          fp.set_target(cfg.target);
          const ConfusionMatrix cm(truth, fp.predict(ds, test), k);
          rec.test_mcc = mcc(cm);
          rec.test_accuracy = accuracy(cm);
          rec.pipeline = fp.to_json();
        } catch (const PipelineFailure& e) {
          rec.test_mcc = 0.0;
          rec.test_accuracy = 0.0;
          rec.pipeline = json{{"failure", e.what()}};
        }

        if (cfg.retrain_all) {
          try {
            auto fp = retrain_all(result.best.genome, bp, ds, outer_train, result.best.eval_seed, cfg.retrain_mode);
            fp.set_target(cfg.target);
            rec.retrained_mcc = mcc(truth, fp.predict(ds, test), k);
            rec.retrained_pipeline = fp.to_json();
          } catch (const PipelineFailure& e) {
            rec.retrain_failure = e.what();
            rec.retrained_mcc = rec.test_mcc;
          }
        }
      } catch (const SearchError& e) {
        rec.failure = e.what();
      }
      report.records.push_back(std::move(rec));
    }
  }
  return report;
}

std::string format_sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void emit_reports(const RunReport& report, const std::filesystem::path& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir / "pipelines", ec);
  if (ec) throw ConfigError("cannot create '" + outdir.string() + "': " + ec.message());

  write_file(outdir / "report.json", report.to_json().dump(2) + "\n");

  for (const auto& r : report.records) {
    if (r.failure) continue;
    const auto stem = "r" + std::to_string(r.run) + "_f" + std::to_string(r.fold);
    write_file(outdir / "pipelines" / ("best_pipeline_" + stem + ".json"), r.pipeline.dump(2) + "\n");
    if (!r.retrained_pipeline.is_null()) {
      write_file(outdir / "pipelines" / ("retrained_pipeline_" + stem + ".json"), r.retrained_pipeline.dump(2) + "\n");
    }
  }

  std::string hist = "dr_mode,count\n";
  const auto h = report.dr_histogram();
  for (std::size_t i = 0; i < kAllDrModes.size(); ++i) hist += to_string(kAllDrModes[i]) + "," + std::to_string(h[i]) + "\n";
  write_file(outdir / "dr_histogram.csv", hist);

  std::string evals = "run,fold,searcher,total_evaluations,restarts\n";
  std::string history = "run,fold,generation,best_fitness,mean_fitness,restarts,evaluations\n";
  std::string timing = "run,fold,wall_time_seconds\n";
  for (const auto& r : report.records) {
    const auto key = std::to_string(r.run) + "," + std::to_string(r.fold);
    evals += key + "," + r.searcher + "," + std::to_string(r.total_evaluations) + "," + std::to_string(r.restarts) + "\n";
    timing += key + "," + format_sig6(r.wall_time) + "\n";
    for (const auto& g : r.history) {
      history += key + "," + std::to_string(g.generation) + "," + format_sig6(g.best_fitness) + "," +
                 format_sig6(g.mean_fitness) + "," + std::to_string(g.restarts) + "," + std::to_string(g.evaluations) + "\n";
    }
  }
  write_file(outdir / "evaluations.csv", evals);
  write_file(outdir / "history.csv", history);
  write_file(outdir / "timing.csv", timing);

  const auto aggs = report.aggregates();
  auto cell = [&](const std::string& key) {
    const auto it = aggs.find(key);
    if (it == aggs.end() || it->second.count == 0) return std::string("n/a");
    return format_sig6(it->second.mean) + " ± " + format_sig6(it->second.stdev);
  };
  std::string md = "# EDCA run summary\n\n";
  md += "searcher: " + report.config.searcher + ", runs: " + std::to_string(report.config.n_runs) +
        ", outer folds: " + std::to_string(report.config.outer_cv_k) + ", seed: " + std::to_string(report.config.seed) + "\n\n";
  md += "| metric | mean ± std |\n|---|---|\n";
  for (const char* key : {"test_mcc", "retrained_mcc", "pct_data", "pct_instances", "pct_features", "total_evaluations",
                          "restarts", "best_fitness"}) {
    md += std::string("| ") + key + " | " + cell(key) + " |\n";
  }
  md += "\n| DR mode | count |\n|---|---|\n";
  for (std::size_t i = 0; i < kAllDrModes.size(); ++i) md += "| " + to_string(kAllDrModes[i]) + " | " + std::to_string(h[i]) + " |\n";
  write_file(outdir / "summary.md", md);
}

}  // namespace edca
