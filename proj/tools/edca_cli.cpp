// edca: analyze datasets, run pipeline searches, score saved pipelines and
// generate synthetic fixtures.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "edca/analyzer.hpp"
#include "edca/dataset.hpp"
#include "edca/errors.hpp"
#include "edca/harness.hpp"
#include "edca/metrics.hpp"
#include "edca/pipeline.hpp"

namespace {

using json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kConfigError = 1, kDataError = 2, kSearchError = 3 };

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw edca::ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw edca::ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::set<std::string> parse_tokens(const std::vector<std::string>& tokens) {
  if (tokens.empty()) return edca::default_missing_tokens();
  return {tokens.begin(), tokens.end()};
}

int cmd_analyze(const std::string& data, const std::string& target, const std::vector<std::string>& tokens) {
  const auto ds = edca::load_csv(data, target, parse_tokens(tokens));
  std::vector<std::size_t> rows(ds.n_rows());
  std::iota(rows.begin(), rows.end(), 0);
  std::cout << edca::to_json(edca::analyze(ds, rows)).dump(2) << "\n";
  return kOk;
}

int cmd_search(const std::string& config_path, std::optional<std::uint64_t> seed,
               std::optional<std::size_t> max_evals, const std::string& out, const std::string& retrain_mode,
               std::optional<std::size_t> runs) {
  auto cfg = edca::run_config_from_json(read_json(config_path),
                                        std::filesystem::path(config_path).parent_path());
  if (seed) cfg.seed = *seed;
  if (max_evals) cfg.ga.max_evaluations = *max_evals;
  if (runs) cfg.n_runs = *runs;
  if (!out.empty()) cfg.output_dir = out;
  if (!retrain_mode.empty()) {
    if (retrain_mode != "instances" && retrain_mode != "both") {
      throw edca::ConfigError("--retrain-all-mode must be 'instances' or 'both'");
    }
    cfg.retrain_all = true;
    cfg.retrain_mode = retrain_mode == "both" ? edca::RetrainMode::Both : edca::RetrainMode::Instances;
  }
  if (const char* w = std::getenv("EDCA_WORKERS")) {
    try {
      cfg.ga.parallel_jobs = static_cast<std::size_t>(std::stoul(w));
    } catch (const std::exception&) {
      throw edca::ConfigError("EDCA_WORKERS must be a positive integer");
    }
  }
  cfg.validate();

  const auto report = edca::run_experiment(cfg);
  bool any_ok = false;
  for (const auto& r : report.records) any_ok = any_ok || !r.failure;
  edca::emit_reports(report, cfg.output_dir);

  const auto aggs = report.aggregates();
  if (auto it = aggs.find("test_mcc"); it != aggs.end()) {
    std::cout << "test MCC " << edca::format_sig6(it->second.mean) << " ± " << edca::format_sig6(it->second.stdev)
              << " over " << it->second.count << " cells\n";
  }
  if (auto it = aggs.find("pct_data"); it != aggs.end()) {
    std::cout << "data used " << edca::format_sig6(it->second.mean) << "\n";
  }
  std::cout << "reports written to " << cfg.output_dir.string() << "\n";
  return any_ok ? kOk : kSearchError;
}

int cmd_evaluate(const std::string& pipeline_path, const std::string& data, const std::string& target_flag,
                 const std::vector<std::string>& tokens) {
  const auto fp = edca::FittedPipeline::from_json(read_json(pipeline_path));
  const auto target = target_flag.empty() ? fp.target() : target_flag;
  const auto ds = edca::load_csv(data, target, parse_tokens(tokens));

  // Re-express the file's labels in the pipeline's label indexing.
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < fp.label_names().size(); ++i) index[fp.label_names()[i]] = static_cast<int>(i);
  std::vector<int> truth;
  truth.reserve(ds.n_rows());
  for (int y : ds.target()) {
    const auto& name = ds.label_names()[static_cast<std::size_t>(y)];
    const auto it = index.find(name);
    if (it == index.end()) throw edca::DataError("label '" + name + "' was not seen by the pipeline");
    truth.push_back(it->second);
  }
  const auto pred = fp.predict(ds);
  const edca::ConfusionMatrix cm(truth, pred, fp.label_names().size());
  json out = {{"rows", ds.n_rows()}, {"mcc", edca::mcc(cm)}, {"accuracy", edca::accuracy(cm)}};
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_synth(const std::string& spec_path, const std::string& out, std::optional<std::uint64_t> seed) {
  const auto j = read_json(spec_path);
  json cfg = {{"synthetic", j}};
  auto rc = edca::run_config_from_json(cfg);
  const auto ds = edca::generate_synthetic(*rc.synthetic, seed.value_or(rc.synthetic_seed));
  edca::write_csv(ds, out, j.value("target", std::string("class")));
  std::cout << "wrote " << ds.n_rows() << " rows x " << ds.n_columns() << " features to " << out << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary data-centric AutoML for tabular classification"};
  app.require_subcommand(1);

  std::string data, target, config, out, pipeline, spec, retrain_mode;
  std::vector<std::string> tokens;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_evals, runs;

  auto* analyze = app.add_subcommand("analyze", "Print column profiles and the derived pipeline blueprint");
  analyze->add_option("--data", data, "CSV file")->required();
  analyze->add_option("--target", target, "Target column")->required();
  analyze->add_option("--missing-token", tokens, "Token treated as missing (repeatable)");

  auto* search = app.add_subcommand("search", "Run a configured experiment and write reports");
  search->add_option("--config", config, "JSON run configuration")->required();
  search->add_option("--seed", seed, "Override the run seed");
  search->add_option("--max-evals", max_evals, "Stop each search after N evaluations");
  search->add_option("--runs", runs, "Override the number of runs");
  search->add_option("--out", out, "Output directory");
  search->add_option("--retrain-all-mode", retrain_mode, "Also retrain on all data: instances|both");

  auto* evaluate = app.add_subcommand("evaluate", "Score a saved pipeline on a CSV file");
  evaluate->add_option("--pipeline", pipeline, "best_pipeline JSON")->required();
  evaluate->add_option("--data", data, "CSV file")->required();
  evaluate->add_option("--target", target, "Target column (defaults to the pipeline's)");
  evaluate->add_option("--missing-token", tokens, "Token treated as missing (repeatable)");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic CSV dataset");
  synth->add_option("--spec", spec, "JSON synthetic spec")->required();
  synth->add_option("--out", out, "Output CSV")->required();
  synth->add_option("--seed", seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(data, target, tokens);
    if (search->parsed()) return cmd_search(config, seed, max_evals, out, retrain_mode, runs);
    if (evaluate->parsed()) return cmd_evaluate(pipeline, data, target, tokens);
    if (synth->parsed()) return cmd_synth(spec, out, seed);
  } catch (const edca::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const edca::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const edca::SearchError& e) {
    std::cerr << "search failed: " << e.what() << "\n";
    return kSearchError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}
