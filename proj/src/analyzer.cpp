#include "edca/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "edca/errors.hpp"

namespace edca {

using json = nlohmann::ordered_json;

std::string to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Binary: return "binary";
    case ColumnKind::Categorical: return "categorical";
    case ColumnKind::Numerical: return "numerical";
    case ColumnKind::Identifier: return "identifier";
  }
  return "unknown";
}

ColumnKind column_kind_from_string(const std::string& s) {
  for (auto k : {ColumnKind::Binary, ColumnKind::Categorical, ColumnKind::Numerical, ColumnKind::Identifier}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown column kind '" + s + "'");
}

const MethodSpec& StepSpec::find(const std::string& method) const {
  for (const auto& o : options) {
    if (o.name == method) return o;
  }
  throw ConfigError("step '" + to_string(step) + "' has no method '" + method + "'");
}

bool Blueprint::has_step(StepId id) const {
  return std::any_of(steps.begin(), steps.end(), [id](const StepSpec& s) { return s.step == id; });
}

std::map<std::string, ColumnKind> Blueprint::feature_kinds() const {
  std::map<std::string, ColumnKind> out;
  for (const auto& p : profiles) out[p.name] = p.kind;
  return out;
}

std::vector<ColumnProfile> infer_column_kinds(const Dataset& ds, std::span<const std::size_t> rows,
                                              const SearchSpaceConfig& cfg) {
  const std::size_t n = rows.size();
  const auto level_cap = std::max(static_cast<double>(cfg.categorical_min_levels),
                                  cfg.categorical_level_fraction * static_cast<double>(n));
  std::vector<ColumnProfile> out;
  out.reserve(ds.n_columns());
  for (const auto& col : ds.columns()) {
    ColumnProfile p{col.name, ColumnKind::Numerical, col.type, false, 0};
    bool integral = true;
    std::set<double> numbers;
    std::set<std::string> texts;
    for (auto r : rows) {
      const auto& cell = col.cells[r];
      if (is_missing(cell)) {
        p.has_missing = true;
      } else if (const auto* d = std::get_if<double>(&cell)) {
        numbers.insert(*d);
        integral = integral && std::floor(*d) == *d;
      } else {
        texts.insert(std::get<std::string>(cell));
      }
    }
    p.distinct_count = numbers.size() + texts.size();
    const bool text = col.type == ColumnType::Text;
    if ((text || integral) && !p.has_missing && n > 0 && p.distinct_count == n) {
      p.kind = ColumnKind::Identifier;
    } else if (p.distinct_count == 2) {
      p.kind = ColumnKind::Binary;
    } else if (text || (integral && static_cast<double>(p.distinct_count) <= level_cap)) {
      p.kind = ColumnKind::Categorical;
    } else {
      p.kind = ColumnKind::Numerical;
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ColumnProfile> infer_column_kinds(const Dataset& ds, const SearchSpaceConfig& cfg) {
  std::vector<std::size_t> rows(ds.n_rows());
  std::iota(rows.begin(), rows.end(), 0);
  return infer_column_kinds(ds, rows, cfg);
}

namespace {

std::vector<MethodSpec> plain_options(const std::vector<std::string>& names) {
  std::vector<MethodSpec> out;
  for (const auto& n : names) out.push_back({n, {}});
  return out;
}

bool any_of_kind(const std::vector<ColumnProfile>& profiles, std::initializer_list<ColumnKind> kinds,
                 bool require_missing) {
  return std::any_of(profiles.begin(), profiles.end(), [&](const ColumnProfile& p) {
    return std::find(kinds.begin(), kinds.end(), p.kind) != kinds.end() && (!require_missing || p.has_missing);
  });
}

}  // namespace

Blueprint build_blueprint(const std::vector<ColumnProfile>& profiles, const SearchSpaceConfig& cfg,
                          std::span<const int> instance_labels, int n_classes) {
  Blueprint bp;
  bp.profiles = profiles;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (profiles[i].kind != ColumnKind::Identifier) bp.features.push_back(i);
  }
  if (bp.features.empty()) throw DataError("no usable features: every column is an identifier");
  bp.max_features = bp.features.size();
  bp.max_instances = instance_labels.size();
  bp.instance_labels.assign(instance_labels.begin(), instance_labels.end());
  bp.n_classes = n_classes;

  if (any_of_kind(profiles, {ColumnKind::Identifier}, false)) {
    bp.steps.push_back({StepId::DropIdentifiers, {{"drop", {}}}});
  }
  if (any_of_kind(profiles, {ColumnKind::Numerical}, true)) {
    bp.steps.push_back({StepId::ImputeNumerical, plain_options(cfg.numeric_imputers)});
  }
  if (any_of_kind(profiles, {ColumnKind::Categorical, ColumnKind::Binary}, true)) {
    bp.steps.push_back({StepId::ImputeCategorical, plain_options(cfg.categorical_imputers)});
  }
  if (any_of_kind(profiles, {ColumnKind::Categorical}, false)) {
    bp.steps.push_back({StepId::Encode, plain_options(cfg.encoders)});
  }
  if (any_of_kind(profiles, {ColumnKind::Numerical}, false)) {
    bp.steps.push_back({StepId::Scale, plain_options(cfg.scalers)});
  }
  if (cfg.models.entries.empty()) throw ConfigError("model space is empty");
  bp.steps.push_back({StepId::Model, cfg.models.entries});
  return bp;
}

Blueprint analyze(const Dataset& ds, std::span<const std::size_t> rows, const SearchSpaceConfig& cfg) {
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (auto r : rows) labels.push_back(ds.target()[r]);
  return build_blueprint(infer_column_kinds(ds, rows, cfg), cfg, labels, ds.n_classes());
}

json to_json(const ColumnProfile& p) {
  return {{"name", p.name}, {"kind", to_string(p.kind)}, {"has_missing", p.has_missing},
          {"distinct_count", p.distinct_count}};
}

json to_json(const Blueprint& bp) {
  json columns = json::array();
  for (const auto& p : bp.profiles) columns.push_back(to_json(p));
  json steps = json::array();
  for (const auto& s : bp.steps) {
    json options = json::array();
    for (const auto& o : s.options) options.push_back(o.name);
    steps.push_back({{"step_id", to_string(s.step)}, {"options", options}});
  }
  return {{"columns", columns},
          {"steps", steps},
          {"max_instances", bp.max_instances},
          {"max_features", bp.max_features},
          {"n_classes", bp.n_classes}};
}

}  // namespace edca
