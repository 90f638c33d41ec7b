#include "edca/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "edca/errors.hpp"

namespace edca {

using json = nlohmann::ordered_json;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::vector<int> argmax_rows(const Matrix& p) {
  std::vector<int> out(p.rows);
  for (std::size_t r = 0; r < p.rows; ++r) out[r] = static_cast<int>(argmax(p.row(r)));
  return out;
}

// In-place softmax over one row of logits.
void softmax(std::span<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (auto& v : z) {
    v = std::exp(v - m);
    s += v;
  }
  for (auto& v : z) v /= s;
}

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw PipelineFailure(std::string(what) + " produced non-finite parameters");
  }
}

json matrix_json(const Matrix& m) { return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}}; }

Matrix matrix_from_json(const json& j) {
  Matrix m;
  m.rows = j.at("rows").get<std::size_t>();
  m.cols = j.at("cols").get<std::size_t>();
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != m.rows * m.cols) throw ConfigError("matrix payload has wrong size");
  return m;
}

json tree_json(const TreeParams& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    if (n.feature < 0) {
      nodes.push_back({{"leaf", n.distribution}});
    } else {
      nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
    }
  }
  return nodes;
}

TreeParams tree_from_json(const json& j) {
  TreeParams t;
  for (const auto& n : j) {
    TreeNode node;
    if (n.contains("leaf")) {
      node.distribution = n.at("leaf").get<std::vector<double>>();
    } else {
      node.feature = n.at("feature").get<int>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
    }
    t.nodes.push_back(std::move(node));
  }
  return t;
}

const std::vector<double>& tree_leaf(const TreeParams& t, std::span<const double> x) {
  std::size_t i = 0;
  while (t.nodes[i].feature >= 0) {
    const auto& n = t.nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return t.nodes[i].distribution;
}

// ---------------------------------------------------------------------------
// CART

double impurity(std::span<const double> counts, double total, bool entropy) {
  if (total <= 0.0) return 0.0;
  double acc = 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    acc += entropy ? -p * std::log2(p) : p * p;
  }
  return entropy ? acc : 1.0 - acc;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> y, int k, const TreeOptions& opt, std::uint64_t seed)
      : x_(x), y_(y), k_(static_cast<std::size_t>(k)), opt_(opt), rng_(seed) {}

  TreeParams build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> rows, std::size_t depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    std::vector<double> counts(k_, 0.0);
    for (auto r : rows) counts[static_cast<std::size_t>(y_[r])] += 1.0;
    const double n = static_cast<double>(rows.size());
    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;

    if (!pure && depth < opt_.max_depth && rows.size() >= opt_.min_samples_split && rows.size() >= 2) {
      if (auto split = best_split(rows, counts)) {
        std::vector<std::size_t> left, right;
        for (auto r : rows) (x_(r, split->feature) <= split->threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        tree_.nodes[static_cast<std::size_t>(id)].feature = static_cast<int>(split->feature);
        tree_.nodes[static_cast<std::size_t>(id)].threshold = split->threshold;
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        tree_.nodes[static_cast<std::size_t>(id)].left = l;
        tree_.nodes[static_cast<std::size_t>(id)].right = r;
        return id;
      }
    }
    for (auto& c : counts) c /= n;
    tree_.nodes[static_cast<std::size_t>(id)].distribution = std::move(counts);
    return id;
  }

  struct Split {
    std::size_t feature;
    double threshold;
  };

  std::optional<Split> best_split(const std::vector<std::size_t>& rows, const std::vector<double>& counts) {
    const std::size_t d = x_.cols;
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    if (opt_.max_features > 0 && opt_.max_features < d) features = rng_.sample(features, opt_.max_features);

    const double n = static_cast<double>(rows.size());
    const double parent = impurity(counts, n, opt_.entropy);
    double best_gain = 1e-12;
    std::optional<Split> best;

    std::vector<std::pair<double, int>> column(rows.size());
    std::vector<double> left(k_), right(k_);
    for (auto f : features) {
      for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {x_(rows[i], f), y_[rows[i]]};
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      std::fill(left.begin(), left.end(), 0.0);
      right = counts;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        const auto c = static_cast<std::size_t>(column[i].second);
        left[c] += 1.0;
        right[c] -= 1.0;
        if (column[i].first == column[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double child = (nl * impurity(left, nl, opt_.entropy) + nr * impurity(right, nr, opt_.entropy)) / n;
        const double gain = parent - child;
        if (gain > best_gain) {
          best_gain = gain;
          double mid = 0.5 * (column[i].first + column[i + 1].first);
          if (!(mid < column[i + 1].first)) mid = column[i].first;
          best = Split{f, mid};
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const int> y_;
  std::size_t k_;
  TreeOptions opt_;
  Rng rng_;
  TreeParams tree_;
};

TreeOptions tree_options(const ParamMap& p, std::size_t n_features) {
  TreeOptions o;
  o.entropy = param_string(p, "criterion", "gini") == "entropy";
  o.max_depth = static_cast<std::size_t>(std::max<std::int64_t>(1, param_int(p, "max_depth", 10)));
  o.min_samples_split = static_cast<std::size_t>(std::max<std::int64_t>(2, param_int(p, "min_samples_split", 2)));
  if (param_string(p, "max_features", "all") == "sqrt") {
    o.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features))));
  }
  return o;
}

// ---------------------------------------------------------------------------
// Individual learners

LogRegParams fit_logreg(const ParamMap& p, const Matrix& x, std::span<const int> y, int k) {
  const double lr = param_double(p, "learning_rate", 0.1);
  const double l2 = param_double(p, "l2", 1e-4);
  const auto epochs = param_int(p, "epochs", 100);
  Matrix w(static_cast<std::size_t>(k), x.cols + 1, 0.0);
  Matrix g;
  for (std::int64_t e = 0; e < epochs; ++e) {
    softmax_loss_and_gradient(w, x, y, l2, &g);
    for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] -= lr * g.data[i];
  }
  check_finite(w.data, "logreg");
  return {std::move(w)};
}

GaussianNBParams fit_gnb(const ParamMap& p, const Matrix& x, std::span<const int> y, int k) {
  const auto kk = static_cast<std::size_t>(k);
  const std::size_t n = x.rows, d = x.cols;
  GaussianNBParams m{std::vector<double>(kk, kNegInf), Matrix(kk, d), Matrix(kk, d)};
  std::vector<double> count(kk, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto c = static_cast<std::size_t>(y[r]);
    count[c] += 1.0;
    for (std::size_t j = 0; j < d; ++j) m.mean(c, j) += x(r, j);
  }
  for (std::size_t c = 0; c < kk; ++c) {
    if (count[c] == 0.0) continue;
    m.log_prior[c] = std::log(count[c] / static_cast<double>(n));
    for (std::size_t j = 0; j < d; ++j) m.mean(c, j) /= count[c];
  }
  for (std::size_t r = 0; r < n; ++r) {
    const auto c = static_cast<std::size_t>(y[r]);
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = x(r, j) - m.mean(c, j);
      m.var(c, j) += diff * diff;
    }
  }
  // Smoothing proportional to the largest overall feature variance.
  double max_var = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mu = 0.0, v = 0.0;
    for (std::size_t r = 0; r < n; ++r) mu += x(r, j);
    mu /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) v += (x(r, j) - mu) * (x(r, j) - mu);
    max_var = std::max(max_var, v / static_cast<double>(n));
  }
  const double eps = param_double(p, "var_smoothing", 1e-9) * (max_var > 0.0 ? max_var : 1.0);
  for (std::size_t c = 0; c < kk; ++c) {
    for (std::size_t j = 0; j < d; ++j) {
      m.var(c, j) = (count[c] > 0.0 ? m.var(c, j) / count[c] : 0.0) + eps;
    }
  }
  check_finite(m.mean.data, "gnb");
  check_finite(m.var.data, "gnb");
  return m;
}

Matrix gnb_proba(const GaussianNBParams& m, const Matrix& x) {
  const std::size_t kk = m.log_prior.size();
  Matrix out(x.rows, kk);
  std::vector<double> z(kk);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < kk; ++c) {
      if (m.log_prior[c] == kNegInf) {
        z[c] = kNegInf;
        continue;
      }
      double ll = m.log_prior[c];
      for (std::size_t j = 0; j < x.cols; ++j) {
        const double v = m.var(c, j);
        const double diff = x(r, j) - m.mean(c, j);
        ll -= 0.5 * std::log(2.0 * M_PI * v) + diff * diff / (2.0 * v);
      }
      z[c] = ll;
    }
    softmax(z);
    std::copy(z.begin(), z.end(), out.data.begin() + static_cast<std::ptrdiff_t>(r * kk));
  }
  return out;
}

Matrix knn_proba(const KnnParams& m, const Matrix& x, std::size_t k_classes) {
  Matrix out(x.rows, k_classes);
  std::vector<std::pair<double, std::size_t>> dist(m.x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t t = 0; t < m.x.rows; ++t) {
      double s = 0.0;
      for (std::size_t j = 0; j < x.cols; ++j) {
        const double diff = x(r, j) - m.x(t, j);
        s += diff * diff;
      }
      dist[t] = {std::sqrt(s), t};
    }
    const std::size_t k = std::min(m.k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    const bool exact = m.distance_weighted && dist[0].first == 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double w = 1.0;
      if (m.distance_weighted) {
        if (exact) {
          if (dist[i].first != 0.0) continue;
        } else {
          w = 1.0 / dist[i].first;
        }
      }
      out(r, static_cast<std::size_t>(m.y[dist[i].second])) += w;
      total += w;
    }
    for (std::size_t c = 0; c < k_classes; ++c) out(r, c) /= total;
  }
  return out;
}

}  // namespace

std::size_t TreeParams::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  // Children always follow their parent in preorder storage.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes[i].feature >= 0) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

const MethodSpec& ModelSpace::find(const std::string& model_id) const {
  for (const auto& e : entries) {
    if (e.name == model_id) return e;
  }
  throw ConfigError("unknown model '" + model_id + "'");
}

ModelSpace default_model_space() {
  using P = ParamSpec;
  return {{
      {"logreg", {P::real("learning_rate", 1e-4, 1.0, true), P::real("l2", 1e-6, 10.0, true), P::integer("epochs", 50, 500)}},
      {"gnb", {P::real("var_smoothing", 1e-12, 1e-6, true)}},
      {"knn", {P::integer("k", 1, 25), P::choice("weights", {"uniform", "distance"})}},
      {"dtree",
       {P::choice("criterion", {"gini", "entropy"}), P::integer("max_depth", 2, 20), P::integer("min_samples_split", 2, 20)}},
      {"rforest",
       {P::integer("n_estimators", 10, 100), P::integer("max_depth", 2, 20), P::choice("criterion", {"gini", "entropy"}),
        P::choice("max_features", {"sqrt", "all"}), P::choice("bootstrap", {"true", "false"})}},
  }};
}

ConfiguredStep sample_model_gene(const ModelSpace& space, Rng& rng) {
  const auto& entry = space.entries.at(rng.index(space.entries.size()));
  return {StepId::Model, entry.name, entry.sample(rng)};
}

double softmax_loss_and_gradient(const Matrix& weights, const Matrix& x, std::span<const int> y, double l2,
                                 Matrix* gradient) {
  const std::size_t k = weights.rows, d = x.cols, n = x.rows;
  if (gradient) *gradient = Matrix(k, d + 1, 0.0);
  std::vector<double> z(k);
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto xr = x.row(r);
    for (std::size_t c = 0; c < k; ++c) {
      double s = weights(c, d);
      for (std::size_t j = 0; j < d; ++j) s += weights(c, j) * xr[j];
      z[c] = s;
    }
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    const auto yr = static_cast<std::size_t>(y[r]);
    loss += std::log(sum) + m - z[yr];
    if (!gradient) continue;
    for (std::size_t c = 0; c < k; ++c) {
      const double delta = std::exp(z[c] - m) / sum - (c == yr ? 1.0 : 0.0);
      for (std::size_t j = 0; j < d; ++j) (*gradient)(c, j) += delta * xr[j];
      (*gradient)(c, d) += delta;
    }
  }
  const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  loss *= inv_n;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < d; ++j) loss += 0.5 * l2 * weights(c, j) * weights(c, j);
  }
  if (gradient) {
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j <= d; ++j) {
        (*gradient)(c, j) *= inv_n;
        if (j < d) (*gradient)(c, j) += l2 * weights(c, j);
      }
    }
  }
  return loss;
}

TreeParams fit_tree(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows, int n_classes,
                    const TreeOptions& options, std::uint64_t seed) {
  return TreeBuilder(x, y, n_classes, options, seed).build({rows.begin(), rows.end()});
}

FittedModel fit_model(const ConfiguredStep& gene, const Matrix& x, std::span<const int> y, int n_classes,
                      std::uint64_t seed) {
  if (x.rows != y.size()) throw PipelineFailure("feature rows and labels differ in length");
  if (x.rows == 0) throw PipelineFailure("no training rows");
  std::vector<bool> seen(static_cast<std::size_t>(n_classes), false);
  for (int v : y) seen.at(static_cast<std::size_t>(v)) = true;
  if (std::count(seen.begin(), seen.end(), true) < 2) throw PipelineFailure("training labels hold a single class");

  const auto& id = gene.method;
  ParamMap hp = gene.params;
  FittedModel::Params params;
  if (id == "logreg") {
    params = fit_logreg(hp, x, y, n_classes);
  } else if (id == "gnb") {
    params = fit_gnb(hp, x, y, n_classes);
  } else if (id == "knn") {
    KnnParams m;
    const auto requested = static_cast<std::size_t>(std::max<std::int64_t>(1, param_int(hp, "k", 5)));
    m.k = std::min(requested, x.rows);
    if (m.k != requested) hp["k"] = static_cast<std::int64_t>(m.k);
    m.distance_weighted = param_string(hp, "weights", "uniform") == "distance";
    m.x = x;
    m.y.assign(y.begin(), y.end());
    params = std::move(m);
  } else if (id == "dtree") {
    std::vector<std::size_t> rows(x.rows);
    std::iota(rows.begin(), rows.end(), 0);
    params = fit_tree(x, y, rows, n_classes, tree_options(hp, x.cols), seed);
  } else if (id == "rforest") {
    const auto n_trees = static_cast<std::size_t>(std::max<std::int64_t>(1, param_int(hp, "n_estimators", 10)));
    const bool bootstrap = param_string(hp, "bootstrap", "true") == "true";
    const auto opt = tree_options(hp, x.cols);
    ForestParams f;
    for (std::size_t t = 0; t < n_trees; ++t) {
      const auto tree_seed = derive_seed(seed, {t});
      std::vector<std::size_t> rows(x.rows);
      if (bootstrap) {
        Rng rng(derive_seed(tree_seed, {0xb007}));
        for (auto& r : rows) r = rng.index(x.rows);
        std::sort(rows.begin(), rows.end());
      } else {
        std::iota(rows.begin(), rows.end(), 0);
      }
      f.trees.push_back(fit_tree(x, y, rows, n_classes, opt, tree_seed));
    }
    params = std::move(f);
  } else {
    throw PipelineFailure("unknown model '" + id + "'");
  }
  return FittedModel(id, n_classes, seed, std::move(hp), std::move(params));
}

Matrix FittedModel::predict_proba(const Matrix& x) const {
  const auto k = static_cast<std::size_t>(n_classes_);
  return std::visit(
      [&](const auto& m) -> Matrix {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LogRegParams>) {
          Matrix out(x.rows, k);
          const std::size_t d = x.cols;
          std::vector<double> z(k);
          for (std::size_t r = 0; r < x.rows; ++r) {
            for (std::size_t c = 0; c < k; ++c) {
              double s = m.weights(c, d);
              for (std::size_t j = 0; j < d; ++j) s += m.weights(c, j) * x(r, j);
              z[c] = s;
            }
            softmax(z);
            for (std::size_t c = 0; c < k; ++c) out(r, c) = z[c];
          }
          return out;
        } else if constexpr (std::is_same_v<T, GaussianNBParams>) {
          return gnb_proba(m, x);
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          return knn_proba(m, x, k);
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          Matrix out(x.rows, k);
          for (std::size_t r = 0; r < x.rows; ++r) {
            const auto& leaf = tree_leaf(m, x.row(r));
            for (std::size_t c = 0; c < k; ++c) out(r, c) = leaf[c];
          }
          return out;
        } else {
          Matrix out(x.rows, k);
          for (const auto& t : m.trees) {
            for (std::size_t r = 0; r < x.rows; ++r) {
              const auto& leaf = tree_leaf(t, x.row(r));
              for (std::size_t c = 0; c < k; ++c) out(r, c) += leaf[c];
            }
          }
          const double inv = 1.0 / static_cast<double>(m.trees.size());
          for (auto& v : out.data) v *= inv;
          return out;
        }
      },
      params_);
}

std::vector<int> FittedModel::predict(const Matrix& x) const { return argmax_rows(predict_proba(x)); }

json FittedModel::to_json() const {
  json state = std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LogRegParams>) {
          return {{"weights", matrix_json(m.weights)}};
        } else if constexpr (std::is_same_v<T, GaussianNBParams>) {
          json prior = json::array();
          for (double v : m.log_prior) prior.push_back(std::isfinite(v) ? json(v) : json(nullptr));
          return {{"log_prior", prior}, {"mean", matrix_json(m.mean)}, {"var", matrix_json(m.var)}};
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          return {{"k", m.k}, {"distance_weighted", m.distance_weighted}, {"x", matrix_json(m.x)}, {"y", m.y}};
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          return {{"nodes", tree_json(m)}};
        } else {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(tree_json(t));
          return {{"trees", trees}};
        }
      },
      params_);
  return {{"model_id", model_id_},
          {"n_classes", n_classes_},
          {"train_seed", seed_},
          {"hyperparameters", edca::to_json(hyperparameters_)},
          {"state", state}};
}

FittedModel FittedModel::from_json(const json& j) {
  const auto id = j.at("model_id").get<std::string>();
  const auto& s = j.at("state");
  Params params;
  if (id == "logreg") {
    params = LogRegParams{matrix_from_json(s.at("weights"))};
  } else if (id == "gnb") {
    GaussianNBParams m;
    for (const auto& v : s.at("log_prior")) m.log_prior.push_back(v.is_null() ? kNegInf : v.get<double>());
    m.mean = matrix_from_json(s.at("mean"));
    m.var = matrix_from_json(s.at("var"));
    params = std::move(m);
  } else if (id == "knn") {
    params = KnnParams{s.at("k").get<std::size_t>(), s.at("distance_weighted").get<bool>(), matrix_from_json(s.at("x")),
                       s.at("y").get<std::vector<int>>()};
  } else if (id == "dtree") {
    params = tree_from_json(s.at("nodes"));
  } else if (id == "rforest") {
    ForestParams f;
    for (const auto& t : s.at("trees")) f.trees.push_back(tree_from_json(t));
    params = std::move(f);
  } else {
    throw ConfigError("unknown model '" + id + "'");
  }
  return FittedModel(id, j.at("n_classes").get<int>(), j.at("train_seed").get<std::uint64_t>(),
                     param_map_from_json(j.at("hyperparameters")), std::move(params));
}

}  // namespace edca
