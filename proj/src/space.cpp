#include "edca/space.hpp"

#include <algorithm>
#include <cmath>

#include "edca/errors.hpp"

namespace edca {

ParamValue ParamSpec::sample(Rng& rng) const {
  switch (kind) {
    case Kind::Int:
      return rng.uniform_int<std::int64_t>(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi));
    case Kind::Real: {
      if (log_scale) return std::clamp(std::exp(rng.uniform(std::log(lo), std::log(hi))), lo, hi);
      return std::clamp(rng.uniform(lo, hi), lo, hi);
    }
    case Kind::Choice:
      return choices.at(rng.index(choices.size()));
  }
  return {};
}

bool ParamSpec::contains(const ParamValue& v) const {
  switch (kind) {
    case Kind::Int: {
      const auto* i = std::get_if<std::int64_t>(&v);
      return i && static_cast<double>(*i) >= lo && static_cast<double>(*i) <= hi;
    }
    case Kind::Real: {
      const auto* d = std::get_if<double>(&v);
      return d && *d >= lo && *d <= hi;
    }
    case Kind::Choice: {
      const auto* s = std::get_if<std::string>(&v);
      return s && std::find(choices.begin(), choices.end(), *s) != choices.end();
    }
  }
  return false;
}

ParamValue ParamSpec::clamp(const ParamValue& v) const {
  if (contains(v)) return v;
  switch (kind) {
    case Kind::Int: {
      double x = 0.5 * (lo + hi);
      if (const auto* i = std::get_if<std::int64_t>(&v)) x = static_cast<double>(*i);
      if (const auto* d = std::get_if<double>(&v)) x = std::round(*d);
      return static_cast<std::int64_t>(std::clamp(x, lo, hi));
    }
    case Kind::Real: {
      double x = 0.5 * (lo + hi);
      if (const auto* i = std::get_if<std::int64_t>(&v)) x = static_cast<double>(*i);
      if (const auto* d = std::get_if<double>(&v); d && std::isfinite(*d)) x = *d;
      return std::clamp(x, lo, hi);
    }
    case Kind::Choice:
      return choices.front();
  }
  return v;
}

ParamMap MethodSpec::sample(Rng& rng) const {
  ParamMap out;
  for (const auto& p : params) out[p.name] = p.sample(rng);
  return out;
}

double as_double(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw ConfigError("expected a numeric hyperparameter, got '" + std::get<std::string>(v) + "'");
}

std::int64_t as_int(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* d = std::get_if<double>(&v)) return static_cast<std::int64_t>(std::llround(*d));
  throw ConfigError("expected an integer hyperparameter, got '" + std::get<std::string>(v) + "'");
}

const std::string& as_string(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw ConfigError("expected a string hyperparameter");
}

double param_double(const ParamMap& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : as_double(it->second);
}

std::int64_t param_int(const ParamMap& p, const std::string& key, std::int64_t fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : as_int(it->second);
}

std::string param_string(const ParamMap& p, const std::string& key, const std::string& fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : as_string(it->second);
}

nlohmann::ordered_json to_json(const ParamValue& v) {
  return std::visit([](const auto& x) { return nlohmann::ordered_json(x); }, v);
}

ParamValue param_from_json(const nlohmann::ordered_json& j) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return std::string(j.get<bool>() ? "true" : "false");
  throw ConfigError("unsupported hyperparameter value: " + j.dump());
}

nlohmann::ordered_json to_json(const ParamMap& p) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : p) j[k] = to_json(v);
  return j;
}

ParamMap param_map_from_json(const nlohmann::ordered_json& j) {
  ParamMap out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = param_from_json(it.value());
  return out;
}

std::string to_string(StepId id) {
  switch (id) {
    case StepId::DropIdentifiers: return "drop_identifiers";
    case StepId::ImputeNumerical: return "impute_numerical";
    case StepId::ImputeCategorical: return "impute_categorical";
    case StepId::Encode: return "encode";
    case StepId::Scale: return "scale";
    case StepId::Model: return "model";
  }
  return "unknown";
}

StepId step_id_from_string(const std::string& s) {
  for (auto id : {StepId::DropIdentifiers, StepId::ImputeNumerical, StepId::ImputeCategorical, StepId::Encode,
                  StepId::Scale, StepId::Model}) {
    if (to_string(id) == s) return id;
  }
  throw ConfigError("unknown step id '" + s + "'");
}

nlohmann::ordered_json to_json(const ConfiguredStep& s) {
  return {{"step_id", to_string(s.step)}, {"method", s.method}, {"hyperparameters", to_json(s.params)}};
}

ConfiguredStep configured_step_from_json(const nlohmann::ordered_json& j) {
  return {step_id_from_string(j.at("step_id").get<std::string>()), j.at("method").get<std::string>(),
          param_map_from_json(j.value("hyperparameters", nlohmann::ordered_json::object()))};
}

}  // namespace edca
