#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "edca/rng.hpp"
#include "edca/space.hpp"

namespace edca {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

/// Candidate models and their hyperparameter spaces.
struct ModelSpace {
  std::vector<MethodSpec> entries;

  const MethodSpec& find(const std::string& model_id) const;
};

ModelSpace default_model_space();

/// Uniform over model ids, then every hyperparameter from its range.
ConfiguredStep sample_model_gene(const ModelSpace& space, Rng& rng);

// ---------------------------------------------------------------------------
// Learned parameter blocks.

struct LogRegParams {
  Matrix weights;  ///< K x (d + 1), last column is the bias
};

struct GaussianNBParams {
  std::vector<double> log_prior;  ///< -inf for classes absent from training
  Matrix mean;                    ///< K x d
  Matrix var;                     ///< K x d, smoothed
};

struct KnnParams {
  std::size_t k = 1;
  bool distance_weighted = false;
  Matrix x;
  std::vector<int> y;
};

struct TreeNode {
  int feature = -1;  ///< -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> distribution;  ///< class proportions of training rows at the node

  bool operator==(const TreeNode&) const = default;
};

struct TreeParams {
  std::vector<TreeNode> nodes;  ///< nodes[0] is the root

  std::size_t depth() const;
  bool operator==(const TreeParams&) const = default;
};

struct ForestParams {
  std::vector<TreeParams> trees;
};

class FittedModel {
 public:
  using Params = std::variant<LogRegParams, GaussianNBParams, KnnParams, TreeParams, ForestParams>;

  FittedModel() = default;
  FittedModel(std::string model_id, int n_classes, std::uint64_t seed, ParamMap hyperparameters, Params params)
      : model_id_(std::move(model_id)),
        n_classes_(n_classes),
        seed_(seed),
        hyperparameters_(std::move(hyperparameters)),
        params_(std::move(params)) {}

  const std::string& model_id() const { return model_id_; }
  int n_classes() const { return n_classes_; }
  std::uint64_t train_seed() const { return seed_; }
  const ParamMap& hyperparameters() const { return hyperparameters_; }
  const Params& params() const { return params_; }

  std::vector<int> predict(const Matrix& x) const;
  /// Class-probability rows (softmax, Gaussian posterior, vote shares).
  Matrix predict_proba(const Matrix& x) const;

  nlohmann::ordered_json to_json() const;
  static FittedModel from_json(const nlohmann::ordered_json& j);

 private:
  std::string model_id_;
  int n_classes_ = 0;
  std::uint64_t seed_ = 0;
  ParamMap hyperparameters_;
  Params params_;
};

/// Trains the model named by `gene.method`. Throws PipelineFailure on a
/// single-class target or non-finite parameters. A knn k larger than the
/// training set is clamped and the effective k is stored.
FittedModel fit_model(const ConfiguredStep& gene, const Matrix& x, std::span<const int> y, int n_classes,
                      std::uint64_t seed);

/// Mean softmax cross-entropy plus 0.5 * l2 * ||W without bias||^2 and its
/// gradient with respect to `weights` (K x (d + 1)).
double softmax_loss_and_gradient(const Matrix& weights, const Matrix& x, std::span<const int> y, double l2,
                                 Matrix* gradient);

struct TreeOptions {
  bool entropy = false;
  std::size_t max_depth = 10;
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;  ///< 0 means all features
};

TreeParams fit_tree(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows, int n_classes,
                    const TreeOptions& options, std::uint64_t seed);

}  // namespace edca
