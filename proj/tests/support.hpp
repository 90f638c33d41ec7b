#pragma once

// Fixtures and independent oracles shared by the unit and acceptance tests.
// Oracles here deliberately avoid the library's own formulas.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "edca/analyzer.hpp"
#include "edca/dataset.hpp"
#include "edca/learners.hpp"

namespace edca_test {

/// Pearson correlation of the flattened one-hot indicator matrices of
/// `truth` and `pred` (n x K each). Equals multiclass MCC by definition.
inline double indicator_pearson(const std::vector<int>& truth, const std::vector<int>& pred, int k) {
  const std::size_t n = truth.size();
  std::vector<double> x(n * k, 0.0), y(n * k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    x[i * k + truth[i]] = 1.0;
    y[i * k + pred[i]] = 1.0;
  }
  // Column-centred covariance summed over the K indicator columns.
  double cov = 0, vx = 0, vy = 0;
  for (int c = 0; c < k; ++c) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += x[i * k + c];
      my += y[i * k + c];
    }
    mx /= n;
    my /= n;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = x[i * k + c] - mx, dy = y[i * k + c] - my;
      cov += dx * dy;
      vx += dx * dx;
      vy += dy * dy;
    }
  }
  if (vx == 0 || vy == 0) return 0.0;
  return cov / std::sqrt(vx * vy);
}

inline std::vector<std::size_t> iota_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

inline edca::Column num_column(std::string name, const std::vector<double>& v) {
  edca::Column c{std::move(name), edca::ColumnType::Number, {}};
  for (double x : v) {
    if (std::isnan(x)) {
      c.cells.emplace_back(edca::Missing{});
    } else {
      c.cells.emplace_back(x);
    }
  }
  return c;
}

inline edca::Column text_column(std::string name, const std::vector<std::string>& v) {
  edca::Column c{std::move(name), edca::ColumnType::Text, {}};
  for (const auto& s : v) {
    if (s.empty()) {
      c.cells.emplace_back(edca::Missing{});
    } else {
      c.cells.emplace_back(s);
    }
  }
  return c;
}

inline std::vector<std::string> class_names(int k) {
  std::vector<std::string> out;
  for (int i = 0; i < k; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

/// Blueprint with `n_instances` instances (labels i % k) and `n_features`
/// numerical features, no missing values: steps Scale + Model.
inline edca::Blueprint numeric_blueprint(std::size_t n_instances, std::size_t n_features, int k) {
  std::vector<edca::ColumnProfile> profiles;
  for (std::size_t j = 0; j < n_features; ++j) {
    profiles.push_back({"f" + std::to_string(j), edca::ColumnKind::Numerical, edca::ColumnType::Number, false,
                        n_instances});
  }
  std::vector<int> labels(n_instances);
  for (std::size_t i = 0; i < n_instances; ++i) labels[i] = static_cast<int>(i % static_cast<std::size_t>(k));
  return edca::build_blueprint(profiles, {}, labels, k);
}

/// Fixture used by the evolutionary acceptance checks.
inline edca::SyntheticSpec fixture_spec() {
  edca::SyntheticSpec s;
  s.n_rows = 600;
  s.n_numerical = 6;
  s.n_noise = 4;
  s.n_categorical = 3;
  s.n_binary = 1;
  s.with_identifier = true;
  s.missing_rate = 0.05;
  s.n_classes = 3;
  s.class_sep = 3.0;
  return s;
}

inline edca::Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  edca::Matrix m(r, c);
  for (auto& v : m.data) v = nd(gen);
  return m;
}

}  // namespace edca_test
