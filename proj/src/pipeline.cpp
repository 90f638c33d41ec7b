#include "edca/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

#include "edca/errors.hpp"

namespace edca {

using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const std::string kMissingToken = "__missing__";

std::string number_token(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> observed(const std::vector<double>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) {
    if (!std::isnan(x)) out.push_back(x);
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Linear-interpolated quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) return 0.0;
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

std::string most_frequent(const std::vector<std::optional<std::string>>& tokens) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : tokens) {
    if (t) ++counts[*t];
  }
  std::string best = kMissingToken;
  std::size_t best_count = 0;
  for (const auto& [tok, c] : counts) {
    if (c > best_count) {
      best = tok;
      best_count = c;
    }
  }
  return best;
}

bool is_impute(StepId id) { return id == StepId::ImputeNumerical || id == StepId::ImputeCategorical; }

void fill_remaining(Frame& f, const std::map<std::string, double>& fallback) {
  for (auto& col : f.columns) {
    if (col.kind != ColumnKind::Numerical) continue;
    const auto it = fallback.find(col.name);
    const double fill = it == fallback.end() ? 0.0 : it->second;
    for (auto& v : col.values) {
      if (std::isnan(v)) v = fill;
    }
  }
}

json step_state_json(const StepState& s) {
  return std::visit(
      [](const auto& st) -> json {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, ImputerState>) {
          json j = json::object();
          for (const auto& [k, v] : st.numeric_fill) j[k] = v;
          for (const auto& [k, v] : st.token_fill) j[k] = v;
          return {{"fill", j}};
        } else if constexpr (std::is_same_v<T, EncoderState>) {
          json j = json::object();
          for (const auto& [k, v] : st.categories) j[k] = v;
          return {{"categories", j}};
        } else if constexpr (std::is_same_v<T, ScalerState>) {
          json j = json::object();
          for (const auto& [k, a] : st.columns) j[k] = {{"center", a.center}, {"scale", a.scale}};
          return {{"columns", j}};
        } else {
          return json::object();
        }
      },
      s);
}

StepState step_state_from_json(const ConfiguredStep& cfg, const json& j) {
  switch (cfg.step) {
    case StepId::ImputeNumerical:
    case StepId::ImputeCategorical: {
      ImputerState st;
      for (auto it = j.at("fill").begin(); it != j.at("fill").end(); ++it) {
        if (it.value().is_string()) {
          st.token_fill[it.key()] = it.value().get<std::string>();
        } else {
          st.numeric_fill[it.key()] = it.value().get<double>();
        }
      }
      return st;
    }
    case StepId::Encode: {
      EncoderState st;
      st.onehot = cfg.method == "onehot";
      for (auto it = j.at("categories").begin(); it != j.at("categories").end(); ++it) {
        st.categories[it.key()] = it.value().get<std::vector<std::string>>();
      }
      return st;
    }
    case StepId::Scale: {
      ScalerState st;
      for (auto it = j.at("columns").begin(); it != j.at("columns").end(); ++it) {
        st.columns[it.key()] = {it.value().at("center").get<double>(), it.value().at("scale").get<double>()};
      }
      return st;
    }
    default:
      return NoState{};
  }
}

}  // namespace

Frame make_frame(const Dataset& ds, std::span<const std::size_t> rows, std::span<const FeatureInfo> features) {
  Frame f;
  f.rows = rows.size();
  for (const auto& feat : features) {
    const auto idx = ds.column_index(feat.name);
    if (!idx) throw DataError("schema mismatch: column '" + feat.name + "' is absent");
    const auto& col = ds.column(*idx);
    if (col.type != feat.type) throw DataError("schema mismatch: column '" + feat.name + "' changed type");
    FrameColumn fc;
    fc.name = feat.name;
    fc.kind = feat.kind;
    fc.numeric = feat.kind == ColumnKind::Numerical;
    if (fc.numeric) {
      fc.values.reserve(rows.size());
      for (auto r : rows) {
        const auto* d = std::get_if<double>(&col.cells[r]);
        fc.values.push_back(d ? *d : kNaN);
      }
    } else {
      fc.tokens.reserve(rows.size());
      for (auto r : rows) {
        const auto& cell = col.cells[r];
        if (const auto* d = std::get_if<double>(&cell)) {
          fc.tokens.emplace_back(number_token(*d));
        } else if (const auto* s = std::get_if<std::string>(&cell)) {
          fc.tokens.emplace_back(*s);
        } else {
          fc.tokens.emplace_back(std::nullopt);
        }
      }
    }
    f.columns.push_back(std::move(fc));
  }
  return f;
}

FittedStep fit_step(const ConfiguredStep& spec, const Frame& data) {
  FittedStep out{spec, NoState{}};
  const auto& m = spec.method;
  switch (spec.step) {
    case StepId::DropIdentifiers:
      if (m != "drop") throw ConfigError("unknown identifier method '" + m + "'");
      break;
    case StepId::ImputeNumerical: {
      if (m != "mean" && m != "median" && m != "constant") throw ConfigError("unknown numeric imputer '" + m + "'");
      ImputerState st;
      for (const auto& col : data.columns) {
        if (col.kind != ColumnKind::Numerical) continue;
        auto obs = observed(col.values);
        double fill = 0.0;
        if (m == "mean") {
          fill = mean_of(obs);
        } else if (m == "median") {
          std::sort(obs.begin(), obs.end());
          fill = quantile_sorted(obs, 0.5);
        }
        st.numeric_fill[col.name] = fill;
      }
      out.state = std::move(st);
      break;
    }
    case StepId::ImputeCategorical: {
      if (m != "most_frequent" && m != "constant") throw ConfigError("unknown categorical imputer '" + m + "'");
      ImputerState st;
      for (const auto& col : data.columns) {
        if (col.kind != ColumnKind::Categorical && col.kind != ColumnKind::Binary) continue;
        if (col.numeric) continue;
        st.token_fill[col.name] = m == "constant" ? kMissingToken : most_frequent(col.tokens);
      }
      out.state = std::move(st);
      break;
    }
    case StepId::Encode: {
      if (m != "onehot" && m != "ordinal") throw ConfigError("unknown encoder '" + m + "'");
      EncoderState st;
      st.onehot = m == "onehot";
      for (const auto& col : data.columns) {
        if (col.kind != ColumnKind::Categorical || col.numeric) continue;
        std::set<std::string> cats;
        for (const auto& t : col.tokens) {
          if (t) cats.insert(*t);
        }
        st.categories[col.name] = {cats.begin(), cats.end()};
      }
      out.state = std::move(st);
      break;
    }
    case StepId::Scale: {
      if (m != "standard" && m != "minmax" && m != "robust") throw ConfigError("unknown scaler '" + m + "'");
      ScalerState st;
      for (const auto& col : data.columns) {
        if (col.kind != ColumnKind::Numerical) continue;
        auto obs = observed(col.values);
        ScalerState::Affine a;
        if (m == "standard") {
          a.center = mean_of(obs);
          double ss = 0.0;
          for (double v : obs) ss += (v - a.center) * (v - a.center);
          a.scale = obs.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(obs.size()));
        } else if (m == "minmax") {
          std::sort(obs.begin(), obs.end());
          a.center = obs.empty() ? 0.0 : obs.front();
          a.scale = obs.empty() ? 0.0 : obs.back() - obs.front();
        } else {
          std::sort(obs.begin(), obs.end());
          a.center = quantile_sorted(obs, 0.5);
          a.scale = quantile_sorted(obs, 0.75) - quantile_sorted(obs, 0.25);
        }
        st.columns[col.name] = a;
      }
      out.state = std::move(st);
      break;
    }
    case StepId::Model:
      throw ConfigError("model step is not a preprocessing step");
  }
  return out;
}

void apply_step(const FittedStep& step, Frame& data) {
  std::visit(
      [&](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, ImputerState>) {
          for (auto& col : data.columns) {
            if (auto it = st.numeric_fill.find(col.name); it != st.numeric_fill.end() && col.kind == ColumnKind::Numerical) {
              for (auto& v : col.values) {
                if (std::isnan(v)) v = it->second;
              }
            }
            if (auto it = st.token_fill.find(col.name); it != st.token_fill.end() && !col.numeric) {
              for (auto& t : col.tokens) {
                if (!t) t = it->second;
              }
            }
          }
        } else if constexpr (std::is_same_v<T, EncoderState>) {
          std::vector<FrameColumn> out;
          for (auto& col : data.columns) {
            const auto it = st.categories.find(col.name);
            if (it == st.categories.end() || col.numeric) {
              out.push_back(std::move(col));
              continue;
            }
            const auto& cats = it->second;
            auto index_of = [&](const std::optional<std::string>& t) -> std::size_t {
              if (!t) return cats.size();
              const auto pos = std::lower_bound(cats.begin(), cats.end(), *t);
              return (pos != cats.end() && *pos == *t) ? static_cast<std::size_t>(pos - cats.begin()) : cats.size();
            };
            if (st.onehot) {
              for (std::size_t c = 0; c < cats.size(); ++c) {
                FrameColumn e{col.name + "=" + cats[c], ColumnKind::Categorical, true, {}, {}};
                e.values.reserve(data.rows);
                for (const auto& t : col.tokens) e.values.push_back(index_of(t) == c ? 1.0 : 0.0);
                out.push_back(std::move(e));
              }
            } else {
              FrameColumn e{col.name, ColumnKind::Categorical, true, {}, {}};
              e.values.reserve(data.rows);
              for (const auto& t : col.tokens) e.values.push_back(static_cast<double>(index_of(t)));
              out.push_back(std::move(e));
            }
          }
          data.columns = std::move(out);
        } else if constexpr (std::is_same_v<T, ScalerState>) {
          for (auto& col : data.columns) {
            if (col.kind != ColumnKind::Numerical) continue;
            const auto it = st.columns.find(col.name);
            if (it == st.columns.end()) continue;
            const auto a = it->second;
            for (auto& v : col.values) v = (a.scale == 0.0 || !std::isfinite(a.scale)) ? 0.0 : (v - a.center) / a.scale;
          }
        }
      },
      step.state);
}

DrSelection apply_dr(const Genome& genome, std::span<const std::size_t> train_rows, std::size_t n_features) {
  DrSelection sel;
  if (genome.is_gene) {
    sel.rows.reserve(genome.is_gene->size());
    for (auto i : *genome.is_gene) {
      if (i >= train_rows.size()) throw PipelineFailure("instance index out of range");
      sel.rows.push_back(train_rows[i]);
    }
  } else {
    sel.rows.assign(train_rows.begin(), train_rows.end());
  }
  if (genome.fs_gene) {
    for (auto i : *genome.fs_gene) {
      if (i >= n_features) throw PipelineFailure("feature index out of range");
    }
    sel.features = *genome.fs_gene;
  } else {
    sel.features.resize(n_features);
    std::iota(sel.features.begin(), sel.features.end(), 0);
  }
  return sel;
}

namespace {

Matrix assemble(const Frame& f, const std::map<std::string, std::string>& binary_positive) {
  Matrix x(f.rows, f.columns.size());
  for (std::size_t c = 0; c < f.columns.size(); ++c) {
    const auto& col = f.columns[c];
    if (col.numeric) {
      for (std::size_t r = 0; r < f.rows; ++r) x(r, c) = col.values[r];
    } else if (col.kind == ColumnKind::Binary) {
      const auto it = binary_positive.find(col.name);
      for (std::size_t r = 0; r < f.rows; ++r) {
        x(r, c) = (it != binary_positive.end() && col.tokens[r] && *col.tokens[r] == it->second) ? 1.0 : 0.0;
      }
    } else {
      throw PipelineFailure("categorical column '" + col.name + "' reached the model unencoded");
    }
  }
  return x;
}

}  // namespace

FittedPipeline fit_pipeline(const Genome& genome, const Blueprint& blueprint, const Dataset& ds,
                            std::span<const std::size_t> train_rows, std::uint64_t seed) {
  if (genome.prep_genes.size() != blueprint.prep_step_count()) {
    throw PipelineFailure("genome does not match the blueprint's preprocessing steps");
  }
  for (std::size_t i = 0; i < genome.prep_genes.size(); ++i) {
    if (genome.prep_genes[i].step != blueprint.steps[i].step) throw PipelineFailure("genome step order mismatch");
  }

  FittedPipeline fp;
  fp.label_names_ = ds.label_names();
  const auto sel = apply_dr(genome, train_rows, blueprint.max_features);
  if (sel.features.empty()) throw PipelineFailure("no features selected");
  for (const auto& p : blueprint.profiles) {
    if (p.kind == ColumnKind::Identifier) fp.dropped_.push_back(p.name);
  }
  for (auto pos : sel.features) {
    const auto& p = blueprint.profiles.at(blueprint.features.at(pos));
    fp.features_.push_back({p.name, p.kind, p.type});
  }

  Frame f = make_frame(ds, sel.rows, fp.features_);
  for (const auto& col : f.columns) {
    if (col.kind == ColumnKind::Numerical) fp.fallback_fill_[col.name] = mean_of(observed(col.values));
  }
  bool filled = false;
  for (const auto& gene : genome.prep_genes) {
    if (!is_impute(gene.step) && gene.step != StepId::DropIdentifiers && !filled) {
      fill_remaining(f, fp.fallback_fill_);
      filled = true;
    }
    auto st = fit_step(gene, f);
    apply_step(st, f);
    fp.steps_.push_back(std::move(st));
  }
  if (!filled) fill_remaining(f, fp.fallback_fill_);

  for (std::size_t c = 0; c < fp.features_.size(); ++c) {
    const auto& feat = fp.features_[c];
    if (feat.kind != ColumnKind::Binary) continue;
    std::optional<std::string> best;
    double best_num = -std::numeric_limits<double>::infinity();
    for (const auto& col : f.columns) {
      if (col.name != feat.name) continue;
      for (const auto& t : col.tokens) {
        if (!t || *t == kMissingToken) continue;
        if (feat.type == ColumnType::Number) {
          const double v = std::strtod(t->c_str(), nullptr);
          if (!best || v > best_num) {
            best = *t;
            best_num = v;
          }
        } else if (!best || *t > *best) {
          best = *t;
        }
      }
    }
    fp.binary_positive_[feat.name] = best.value_or(kMissingToken);
  }

  const Matrix x = assemble(f, fp.binary_positive_);
  std::vector<int> y;
  y.reserve(sel.rows.size());
  for (auto r : sel.rows) y.push_back(ds.target()[r]);
  fp.model_ = fit_model(genome.model_gene, x, y, ds.n_classes(), seed);
  fp.dims_ = {sel.rows.size(), sel.features.size(), train_rows.size(), blueprint.max_features};
  return fp;
}

Frame FittedPipeline::run_steps(const Dataset& ds, std::span<const std::size_t> rows) const {
  Frame f = make_frame(ds, rows, features_);
  bool filled = false;
  for (const auto& st : steps_) {
    if (!is_impute(st.config.step) && st.config.step != StepId::DropIdentifiers && !filled) {
      fill_remaining(f, fallback_fill_);
      filled = true;
    }
    apply_step(st, f);
  }
  if (!filled) fill_remaining(f, fallback_fill_);
  return f;
}

Matrix FittedPipeline::transform(const Dataset& ds, std::span<const std::size_t> rows) const {
  return assemble(run_steps(ds, rows), binary_positive_);
}

std::vector<int> FittedPipeline::predict(const Dataset& ds, std::span<const std::size_t> rows) const {
  if (rows.empty()) return {};
  return model_.predict(transform(ds, rows));
}

std::vector<int> FittedPipeline::predict(const Dataset& ds) const {
  std::vector<std::size_t> rows(ds.n_rows());
  std::iota(rows.begin(), rows.end(), 0);
  return predict(ds, rows);
}

json FittedPipeline::to_json() const {
  const double pct_i = dims_.max_instances ? static_cast<double>(dims_.rows_used) / static_cast<double>(dims_.max_instances) : 1.0;
  const double pct_f = dims_.max_features ? static_cast<double>(dims_.features_used) / static_cast<double>(dims_.max_features) : 1.0;

  auto method_of = [&](StepId id) -> json {
    for (const auto& s : steps_) {
      if (s.config.step == id) return s.config.method;
    }
    return nullptr;
  };
  json imp = json::array();
  for (auto id : {StepId::ImputeNumerical, StepId::ImputeCategorical}) {
    if (auto m = method_of(id); !m.is_null()) imp.push_back(m);
  }

  json features = json::array();
  json fs_names = json::array();
  for (const auto& f : features_) {
    features.push_back({{"name", f.name},
                        {"kind", edca::to_string(f.kind)},
                        {"type", f.type == ColumnType::Number ? "number" : "text"}});
    fs_names.push_back(f.name);
  }
  json steps = json::array();
  for (const auto& s : steps_) {
    json j = edca::to_json(s.config);
    j["state"] = step_state_json(s.state);
    steps.push_back(std::move(j));
  }
  json fallback = json::object();
  for (const auto& [k, v] : fallback_fill_) fallback[k] = v;
  json binary = json::object();
  for (const auto& [k, v] : binary_positive_) binary[k] = v;

  return {{"format", "edca-pipeline/1"},
          {"target", target_},
          {"label_names", label_names_},
          {"%I", pct_i},
          {"%F", pct_f},
          {"Imp", imp},
          {"Scaler", method_of(StepId::Scale)},
          {"Encoder", method_of(StepId::Encode)},
          {"Model", model_.model_id()},
          {"is_fraction", pct_i},
          {"fs_names", fs_names},
          {"training_dims",
           {{"rows_used", dims_.rows_used},
            {"features_used", dims_.features_used},
            {"max_instances", dims_.max_instances},
            {"max_features", dims_.max_features}}},
          {"dropped_identifiers", dropped_},
          {"features", features},
          {"fallback_fill", fallback},
          {"binary_positive", binary},
          {"steps", steps},
          {"model", model_.to_json()}};
}

FittedPipeline FittedPipeline::from_json(const json& j) {
  if (j.value("format", "") != "edca-pipeline/1") throw ConfigError("not an edca pipeline file");
  FittedPipeline fp;
  fp.target_ = j.at("target").get<std::string>();
  fp.label_names_ = j.at("label_names").get<std::vector<std::string>>();
  fp.dropped_ = j.at("dropped_identifiers").get<std::vector<std::string>>();
  for (const auto& f : j.at("features")) {
    fp.features_.push_back({f.at("name").get<std::string>(), column_kind_from_string(f.at("kind").get<std::string>()),
                            f.at("type").get<std::string>() == "number" ? ColumnType::Number : ColumnType::Text});
  }
  for (auto it = j.at("fallback_fill").begin(); it != j.at("fallback_fill").end(); ++it) {
    fp.fallback_fill_[it.key()] = it.value().get<double>();
  }
  for (auto it = j.at("binary_positive").begin(); it != j.at("binary_positive").end(); ++it) {
    fp.binary_positive_[it.key()] = it.value().get<std::string>();
  }
  for (const auto& s : j.at("steps")) {
    auto cfg = configured_step_from_json(s);
    auto state = step_state_from_json(cfg, s.at("state"));
    fp.steps_.push_back({std::move(cfg), std::move(state)});
  }
  fp.model_ = FittedModel::from_json(j.at("model"));
  const auto& d = j.at("training_dims");
  fp.dims_ = {d.at("rows_used").get<std::size_t>(), d.at("features_used").get<std::size_t>(),
              d.at("max_instances").get<std::size_t>(), d.at("max_features").get<std::size_t>()};
  return fp;
}

}  // namespace edca
