#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "edca/dataset.hpp"
#include "edca/learners.hpp"
#include "edca/space.hpp"

namespace edca {

enum class ColumnKind { Binary, Categorical, Numerical, Identifier };

std::string to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& s);

struct ColumnProfile {
  std::string name;
  ColumnKind kind = ColumnKind::Numerical;
  ColumnType type = ColumnType::Number;
  bool has_missing = false;
  std::size_t distinct_count = 0;  ///< over non-missing cells

  bool operator==(const ColumnProfile&) const = default;
};

/// Option spaces and thresholds used to derive a blueprint.
struct SearchSpaceConfig {
  std::size_t categorical_min_levels = 20;
  double categorical_level_fraction = 0.05;
  std::vector<std::string> scalers{"standard", "minmax", "robust"};
  std::vector<std::string> encoders{"onehot", "ordinal"};
  std::vector<std::string> numeric_imputers{"mean", "median", "constant"};
  std::vector<std::string> categorical_imputers{"most_frequent", "constant"};
  ModelSpace models = default_model_space();
};

struct StepSpec {
  StepId step = StepId::Model;
  std::vector<MethodSpec> options;

  const MethodSpec& find(const std::string& method) const;
};

/// Pipeline skeleton for one dataset. Step order is fixed:
/// drop-identifiers, impute-numerical, impute-categorical, encode, scale,
/// model; each preprocessing step is present only when its trigger held.
struct Blueprint {
  std::vector<StepSpec> steps;
  std::vector<ColumnProfile> profiles;  ///< every feature column, identifiers included
  std::vector<std::size_t> features;    ///< indices into `profiles` that survive identifier removal
  std::size_t max_instances = 0;
  std::size_t max_features = 0;
  std::vector<int> instance_labels;     ///< class of each instance an IS gene can index
  int n_classes = 0;

  std::size_t prep_step_count() const { return steps.empty() ? 0 : steps.size() - 1; }
  const StepSpec& model_step() const { return steps.back(); }
  bool has_step(StepId id) const;
  std::map<std::string, ColumnKind> feature_kinds() const;
};

/// Assigns one kind per feature column over `rows`, in priority order:
/// Identifier (integer or text, all distinct, none missing), Binary (two
/// distinct values), Categorical (text, or integer-valued with few levels),
/// Numerical.
std::vector<ColumnProfile> infer_column_kinds(const Dataset& ds, std::span<const std::size_t> rows,
                                              const SearchSpaceConfig& cfg = {});
std::vector<ColumnProfile> infer_column_kinds(const Dataset& ds, const SearchSpaceConfig& cfg = {});

/// Throws DataError when no usable (non-identifier) feature remains.
Blueprint build_blueprint(const std::vector<ColumnProfile>& profiles, const SearchSpaceConfig& cfg,
                          std::span<const int> instance_labels, int n_classes);

/// infer_column_kinds followed by build_blueprint over the `rows` subset.
Blueprint analyze(const Dataset& ds, std::span<const std::size_t> rows, const SearchSpaceConfig& cfg = {});

nlohmann::ordered_json to_json(const ColumnProfile& p);
nlohmann::ordered_json to_json(const Blueprint& bp);

}  // namespace edca
