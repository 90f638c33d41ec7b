#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "edca/rng.hpp"
#include "json.hpp"

namespace edca {

using ParamValue = std::variant<std::int64_t, double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

/// One tunable hyperparameter: a closed integer/real range (optionally
/// sampled on a log scale) or a finite set of string choices.
struct ParamSpec {
  enum class Kind { Int, Real, Choice };

  std::string name;
  Kind kind = Kind::Real;
  double lo = 0.0;
  double hi = 0.0;
  bool log_scale = false;
  std::vector<std::string> choices;

  static ParamSpec integer(std::string name, std::int64_t lo, std::int64_t hi) {
    return {std::move(name), Kind::Int, static_cast<double>(lo), static_cast<double>(hi), false, {}};
  }
  static ParamSpec real(std::string name, double lo, double hi, bool log_scale = false) {
    return {std::move(name), Kind::Real, lo, hi, log_scale, {}};
  }
  static ParamSpec choice(std::string name, std::vector<std::string> choices) {
    return {std::move(name), Kind::Choice, 0.0, 0.0, false, std::move(choices)};
  }

  ParamValue sample(Rng& rng) const;
  bool contains(const ParamValue& v) const;
  /// Nearest in-space value: numbers clamped, unknown choices replaced by
  /// the first choice, wrong alternative replaced by the range midpoint.
  ParamValue clamp(const ParamValue& v) const;
};

/// A selectable method for a pipeline step and its hyperparameter space.
struct MethodSpec {
  std::string name;
  std::vector<ParamSpec> params;

  ParamMap sample(Rng& rng) const;
};

double as_double(const ParamValue& v);
std::int64_t as_int(const ParamValue& v);
const std::string& as_string(const ParamValue& v);

/// Typed lookup with a fallback when the key is absent.
double param_double(const ParamMap& p, const std::string& key, double fallback);
std::int64_t param_int(const ParamMap& p, const std::string& key, std::int64_t fallback);
std::string param_string(const ParamMap& p, const std::string& key, const std::string& fallback);

enum class StepId { DropIdentifiers, ImputeNumerical, ImputeCategorical, Encode, Scale, Model };

std::string to_string(StepId id);
StepId step_id_from_string(const std::string& s);

/// A pipeline step as carried by a genome: the chosen method and its
/// hyperparameter values.
struct ConfiguredStep {
  StepId step = StepId::Model;
  std::string method;
  ParamMap params;

  bool operator==(const ConfiguredStep&) const = default;
};

nlohmann::ordered_json to_json(const ConfiguredStep& s);
ConfiguredStep configured_step_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json to_json(const ParamValue& v);
ParamValue param_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const ParamMap& p);
ParamMap param_map_from_json(const nlohmann::ordered_json& j);

}  // namespace edca
