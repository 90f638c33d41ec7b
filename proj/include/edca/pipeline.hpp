#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "edca/analyzer.hpp"
#include "edca/dataset.hpp"
#include "edca/genome.hpp"
#include "edca/learners.hpp"

namespace edca {

/// Column-oriented working table flowing through preprocessing. Numerical
/// columns hold doubles (NaN = missing); categorical and binary columns hold
/// tokens (nullopt = missing) until an encoder turns them numeric.
struct FrameColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Numerical;
  bool numeric = true;
  std::vector<double> values;
  std::vector<std::optional<std::string>> tokens;
};

struct Frame {
  std::size_t rows = 0;
  std::vector<FrameColumn> columns;
};

/// Schema entry for one feature the pipeline consumes.
struct FeatureInfo {
  std::string name;
  ColumnKind kind = ColumnKind::Numerical;
  ColumnType type = ColumnType::Number;

  bool operator==(const FeatureInfo&) const = default;
};

Frame make_frame(const Dataset& ds, std::span<const std::size_t> rows, std::span<const FeatureInfo> features);

struct ImputerState {
  std::map<std::string, double> numeric_fill;
  std::map<std::string, std::string> token_fill;
};

struct EncoderState {
  bool onehot = true;
  std::map<std::string, std::vector<std::string>> categories;  ///< sorted per column
};

struct ScalerState {
  struct Affine {
    double center = 0.0;
    double scale = 1.0;  ///< 0 marks a degenerate column that maps to 0
  };
  std::map<std::string, Affine> columns;
};

struct NoState {};

using StepState = std::variant<NoState, ImputerState, EncoderState, ScalerState>;

struct FittedStep {
  ConfiguredStep config;
  StepState state;
};

/// Learns step statistics from `data`. Throws ConfigError when the method
/// is unknown for the step.
FittedStep fit_step(const ConfiguredStep& spec, const Frame& data);
/// Transforms `data` in place using fitted statistics only.
void apply_step(const FittedStep& step, Frame& data);

/// Rows and features a genome trains on. Positions index `train_rows` and
/// `features`; absent genes select everything.
struct DrSelection {
  RowIndices rows;
  std::vector<std::size_t> features;
};

DrSelection apply_dr(const Genome& genome, std::span<const std::size_t> train_rows, std::size_t n_features);

struct TrainingDims {
  std::size_t rows_used = 0;
  std::size_t features_used = 0;
  std::size_t max_instances = 0;
  std::size_t max_features = 0;
};

class FittedPipeline {
 public:
  const std::vector<FeatureInfo>& features() const { return features_; }
  const std::vector<FittedStep>& steps() const { return steps_; }
  const FittedModel& model() const { return model_; }
  const TrainingDims& training_dims() const { return dims_; }
  const std::vector<std::string>& label_names() const { return label_names_; }
  const std::string& target() const { return target_; }
  void set_target(std::string name) { target_ = std::move(name); }
  int n_classes() const { return static_cast<int>(label_names_.size()); }

  /// Preprocessed design matrix for `rows` (instance selection never applies).
  Matrix transform(const Dataset& ds, std::span<const std::size_t> rows) const;
  std::vector<int> predict(const Dataset& ds, std::span<const std::size_t> rows) const;
  std::vector<int> predict(const Dataset& ds) const;

  nlohmann::ordered_json to_json() const;
  static FittedPipeline from_json(const nlohmann::ordered_json& j);

 private:
  friend FittedPipeline fit_pipeline(const Genome&, const Blueprint&, const Dataset&, std::span<const std::size_t>,
                                     std::uint64_t);

  Frame run_steps(const Dataset& ds, std::span<const std::size_t> rows) const;

  std::string target_ = "class";
  std::vector<std::string> label_names_;
  std::vector<std::string> dropped_;
  std::vector<FeatureInfo> features_;
  std::map<std::string, double> fallback_fill_;
  std::map<std::string, std::string> binary_positive_;
  std::vector<FittedStep> steps_;
  FittedModel model_;
  TrainingDims dims_;
};

/// Fits a genome on `train_rows` of `ds`. The IS gene indexes positions in
/// `train_rows`; the FS gene indexes blueprint features. Throws
/// PipelineFailure on numerical or structural failure.
FittedPipeline fit_pipeline(const Genome& genome, const Blueprint& blueprint, const Dataset& ds,
                            std::span<const std::size_t> train_rows, std::uint64_t seed);

}  // namespace edca
