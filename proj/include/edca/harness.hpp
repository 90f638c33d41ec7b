#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "edca/dataset.hpp"
#include "edca/evolution.hpp"
#include "edca/metrics.hpp"
#include "edca/pipeline.hpp"

namespace edca {

inline constexpr const char* kArtifactVersion = "0.1.0";

enum class RetrainMode { Instances, Both };

struct RunConfig {
  std::optional<std::filesystem::path> data_path;
  std::optional<SyntheticSpec> synthetic;
  std::uint64_t synthetic_seed = 0;
  std::string target = "class";
  std::set<std::string> missing_tokens = default_missing_tokens();
  GAConfig ga;
  std::size_t outer_cv_k = 5;  ///< 1 selects a single stratified holdout of test_fraction
  double test_fraction = 0.25;
  std::size_t n_runs = 30;
  double val_fraction = 0.25;
  bool stratified = true;
  std::string searcher = "edca";
  bool retrain_all = false;
  RetrainMode retrain_mode = RetrainMode::Instances;
  std::filesystem::path output_dir = "edca_out";
  std::uint64_t seed = 0;

  void validate() const;
};

/// Reads a JSON config; relative data paths resolve against `base_dir`.
RunConfig run_config_from_json(const nlohmann::ordered_json& j, const std::filesystem::path& base_dir = {});
nlohmann::ordered_json to_json(const RunConfig& cfg);

/// One (run, fold) cell.
struct RunRecord {
  std::size_t run = 0;
  std::size_t fold = 0;
  std::string searcher;
  std::optional<std::string> failure;
  double test_mcc = 0.0;
  double test_accuracy = 0.0;
  double best_fitness = 1.0;
  UsageReport usage;
  DrMode mode = DrMode::None;
  std::size_t total_evaluations = 0;
  std::size_t restarts = 0;
  double wall_time = 0.0;
  std::optional<double> retrained_mcc;
  std::optional<std::string> retrain_failure;
  Genome best_genome;
  nlohmann::ordered_json pipeline;          ///< serialized best FittedPipeline
  nlohmann::ordered_json retrained_pipeline;  ///< null unless retraining ran
  std::vector<GenerationStats> history;
};

struct Aggregate {
  std::size_t count = 0;
  double mean = 0.0;
  double stdev = 0.0;  ///< sample standard deviation
};

Aggregate aggregate(std::span<const double> values);

struct RunReport {
  RunConfig config;
  std::vector<RunRecord> records;

  /// Mean and standard deviation per reported column over successful records.
  std::map<std::string, Aggregate> aggregates() const;
  std::array<std::size_t, 4> dr_histogram() const;
  /// Deterministic JSON: no timing data, stable key order.
  nlohmann::ordered_json to_json() const;
};

/// Refits `best` on all rows of the outer-training fold. The IS gene is
/// always dropped; the FS gene too under RetrainMode::Both.
FittedPipeline retrain_all(const Genome& best, const Blueprint& blueprint, const Dataset& ds,
                           std::span<const std::size_t> full_train, std::uint64_t seed,
                           RetrainMode mode = RetrainMode::Instances);

/// Runs every (run, fold) cell on `ds`.
RunReport run_experiment(const RunConfig& cfg, const Dataset& ds);
/// Loads the configured dataset (CSV or synthetic) and runs the experiment.
RunReport run_experiment(const RunConfig& cfg);

Dataset load_configured_dataset(const RunConfig& cfg);

/// Writes report.json, pipelines/best_pipeline_r<run>_f<fold>.json,
/// dr_histogram.csv, evaluations.csv, history.csv, timing.csv and
/// summary.md into `outdir`.
void emit_reports(const RunReport& report, const std::filesystem::path& outdir);

/// Fixed six-significant-digit rendering used in CSV and markdown outputs.
std::string format_sig6(double v);

}  // namespace edca
