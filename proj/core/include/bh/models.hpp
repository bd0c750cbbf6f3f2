/*
 * Copyright 2026 The bhest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BH_MODELS_HPP_
#define BH_MODELS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bh/rng.hpp"
#include "bh/table.hpp"
#include "json.hpp"

namespace bh {

class ForestModel;

// Common interface for every height regressor. Models are immutable once
// fitted and safe to share between threads.
class Regressor {
 public:
  virtual ~Regressor() = default;

  virtual std::string_view kind() const = 0;
  const std::vector<std::string>& feature_names() const { return features_; }
  std::size_t n_features() const { return features_.size(); }

  // Throws kShape when the row width does not match the training features.
  double predict(std::span<const double> row) const;
  std::vector<double> predict_all(const Dataset& data) const;
  std::vector<double> predict_table(const FeatureTable& table) const;

  virtual nlohmann::json to_json() const = 0;

  // Non-null for forests; lets explainers use per-tree shortcuts.
  virtual const ForestModel* as_forest() const { return nullptr; }

 protected:
  virtual double predict_unchecked(std::span<const double> row) const = 0;
  std::vector<std::string> features_;
};

// --- CART -------------------------------------------------------------------

struct TreeParams {
  std::size_t mtry = 0;       // features tried per split; 0 = all
  std::size_t min_leaf = 5;   // rows per leaf, counted with bootstrap duplicates
  std::size_t max_depth = 0;  // 0 = unlimited
};

// Flat node record: internal nodes have feature >= 0 and send rows with
// x[feature] <= threshold to `left`; leaves have feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  std::size_t n = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
      const TreeNode& node = nodes_[i];
      i = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold
                                       ? node.left
                                       : node.right);
    }
    return nodes_[i].value;
  }

  std::span<const TreeNode> nodes() const { return nodes_; }
  std::size_t depth() const;
  bool uses_feature(std::size_t feature) const;
  // Sorted distinct split features.
  std::vector<std::size_t> used_features() const;

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

// Variance-reduction gain n*Var(parent) - nL*Var(L) - nR*Var(R) from sums.
inline double split_gain(double sum_left, std::size_t n_left, double sum_right,
                         std::size_t n_right) {
  const double sum = sum_left + sum_right;
  const auto nl = static_cast<double>(n_left);
  const auto nr = static_cast<double>(n_right);
  return sum_left * sum_left / nl + sum_right * sum_right / nr - sum * sum / (nl + nr);
}

// Split threshold between two consecutive distinct sorted values: their
// midpoint, or `lo` when the midpoint rounds onto `hi`.
inline double split_threshold(double lo, double hi) {
  const double mid = lo + (hi - lo) * 0.5;
  return mid < hi ? mid : lo;
}

// Greedy CART on `rows` of `data` (duplicates allowed). When params.mtry is
// below the feature count, `rng` draws the candidate features at each node.
// Ties go to the lowest feature index, then the lowest threshold.
RegressionTree fit_tree(const Dataset& data, std::span<const std::uint32_t> rows,
                        const TreeParams& params, Rng* rng = nullptr);
RegressionTree fit_tree(const Dataset& data, const TreeParams& params);

class TreeModel final : public Regressor {
 public:
  TreeModel(RegressionTree tree, TreeParams params, std::vector<std::string> features);
  std::string_view kind() const override { return "tree"; }
  const RegressionTree& tree() const { return tree_; }
  const TreeParams& params() const { return params_; }
  nlohmann::json to_json() const override;

 protected:
  double predict_unchecked(std::span<const double> row) const override {
    return tree_.predict(row);
  }

 private:
  RegressionTree tree_;
  TreeParams params_;
};

std::unique_ptr<TreeModel> fit_tree_model(const Dataset& data, const TreeParams& params);

// --- Random forest -------------------------------------------------------------

struct ForestParams {
  std::size_t n_trees = 500;
  std::size_t mtry = 0;  // 0 = ceil(n_features / 3)
  std::size_t min_leaf = 5;
  std::size_t max_depth = 0;
  std::uint64_t seed = 42;
};

class ForestModel final : public Regressor {
 public:
  ForestModel(std::vector<RegressionTree> trees, std::vector<std::vector<std::uint32_t>> bootstrap,
              ForestParams params, std::vector<std::string> features, std::size_t n_rows);

  std::string_view kind() const override { return "forest"; }
  std::span<const RegressionTree> trees() const { return trees_; }
  // Per-tree bootstrap row indices (length n_rows each, with replacement).
  std::span<const std::vector<std::uint32_t>> bootstrap() const { return bootstrap_; }
  const ForestParams& params() const { return params_; }
  std::size_t n_training_rows() const { return n_rows_; }
  // Per tree, rows absent from its bootstrap.
  std::vector<std::vector<std::uint32_t>> oob_rows() const;

  nlohmann::json to_json() const override;
  const ForestModel* as_forest() const override { return this; }

 protected:
  double predict_unchecked(std::span<const double> row) const override;

 private:
  std::vector<RegressionTree> trees_;
  std::vector<std::vector<std::uint32_t>> bootstrap_;
  ForestParams params_;
  std::size_t n_rows_ = 0;
};

std::size_t resolve_mtry(std::size_t mtry, std::size_t n_features);

// Tree t trains on a bootstrap drawn from Rng(sub_seed(seed, t)), so each
// tree depends only on (data, params, t).
std::unique_ptr<ForestModel> fit_forest(const Dataset& data, const ForestParams& params);

// Test hook: trains tree t on bootstraps[t] instead of a random draw.
std::unique_ptr<ForestModel> fit_forest_with_bootstraps(
    const Dataset& data, const ForestParams& params,
    std::vector<std::vector<std::uint32_t>> bootstraps);

struct OobResult {
  double mse = 0.0;
  std::size_t scored = 0;   // rows with at least one OOB tree
  std::size_t skipped = 0;  // rows in every bootstrap
};

// Throws kData when no row has an OOB tree.
OobResult oob_error(const ForestModel& model, const Dataset& data);

// Mean over trees of (OOB MSE with the feature permuted among the tree's OOB
// rows) - (OOB MSE as is), averaged over `repeats` permutations.
std::vector<double> rf_variable_importance(const ForestModel& model, const Dataset& data,
                                           std::size_t repeats, std::uint64_t seed);

// --- Gradient boosting --------------------------------------------------------

struct BoostParams {
  std::size_t n_stages = 200;
  double shrinkage = 0.1;
  std::size_t max_depth = 3;
  std::size_t min_leaf = 1;
};

class BoostedModel final : public Regressor {
 public:
  BoostedModel(double initial, std::vector<RegressionTree> stages, BoostParams params,
               std::vector<std::string> features, std::vector<double> train_mse = {});
  std::string_view kind() const override { return "boosted"; }
  double initial() const { return initial_; }
  std::span<const RegressionTree> stages() const { return stages_; }
  const BoostParams& params() const { return params_; }
  // Training MSE after 0..n_stages stages (empty for loaded models).
  std::span<const double> train_mse() const { return train_mse_; }
  nlohmann::json to_json() const override;

 protected:
  double predict_unchecked(std::span<const double> row) const override;

 private:
  double initial_;
  std::vector<RegressionTree> stages_;
  BoostParams params_;
  std::vector<double> train_mse_;
};

// Squared-loss boosting: stage k fits a depth-limited tree to the current
// residuals and adds shrinkage * tree.
std::unique_ptr<BoostedModel> fit_boosted(const Dataset& data, const BoostParams& params);

// --- Linear and KNN baselines -----------------------------------------------------

class LinearModel final : public Regressor {
 public:
  LinearModel(double intercept, std::vector<double> coef, std::vector<std::string> features,
              bool used_ridge);
  std::string_view kind() const override { return "linear"; }
  double intercept() const { return intercept_; }
  std::span<const double> coefficients() const { return coef_; }
  bool used_ridge() const { return used_ridge_; }
  nlohmann::json to_json() const override;

 protected:
  double predict_unchecked(std::span<const double> row) const override;

 private:
  double intercept_;
  std::vector<double> coef_;
  bool used_ridge_;
};

inline constexpr double kOlsRidge = 1e-8;
inline constexpr double kMetaRidge = 1e-6;

// Least squares on centered features through the normal equations; falls back
// to ridge `ridge` when the design is rank deficient. Requires n_rows >
// n_features.
std::unique_ptr<LinearModel> fit_ols(const Dataset& data, double ridge = kOlsRidge);

class KnnModel final : public Regressor {
 public:
  KnnModel(std::size_t k, std::vector<double> mean, std::vector<double> scale,
           std::vector<double> x_std, std::vector<double> y, std::vector<std::string> features);
  std::string_view kind() const override { return "knn"; }
  std::size_t k() const { return k_; }
  nlohmann::json to_json() const override;

 protected:
  double predict_unchecked(std::span<const double> row) const override;

 private:
  std::size_t k_;
  std::vector<double> mean_, scale_, x_std_, y_;
};

// Mean target of the k nearest training rows by Euclidean distance on
// features standardized with the training mean and population stddev.
// Distance ties resolve to the lower row index.
std::unique_ptr<KnnModel> fit_knn(const Dataset& data, std::size_t k);
double knn_predict(const Dataset& data, std::span<const double> row, std::size_t k);

// --- Stacking -----------------------------------------------------------------

using ModelFactory = std::function<std::unique_ptr<Regressor>(const Dataset&)>;

class StackedModel final : public Regressor {
 public:
  StackedModel(std::vector<std::unique_ptr<Regressor>> bases, double intercept,
               std::vector<double> weights, bool used_ridge, std::vector<std::string> features);
  std::string_view kind() const override { return "stacked"; }
  std::size_t n_bases() const { return bases_.size(); }
  const Regressor& base(std::size_t i) const { return *bases_[i]; }
  double intercept() const { return intercept_; }
  std::span<const double> weights() const { return weights_; }
  bool used_ridge() const { return used_ridge_; }
  nlohmann::json to_json() const override;

 protected:
  double predict_unchecked(std::span<const double> row) const override;

 private:
  std::vector<std::unique_ptr<Regressor>> bases_;
  double intercept_;
  std::vector<double> weights_;
  bool used_ridge_;
};

// Out-of-fold base predictions form the meta design; the meta model is a
// least-squares linear fit with intercept (ridge 1e-6 when singular); bases
// are then refit on all rows.
std::unique_ptr<StackedModel> fit_stacked(const Dataset& data,
                                          std::span<const ModelFactory> bases,
                                          std::size_t folds, std::uint64_t seed);

// --- Model specs -----------------------------------------------------------------

// Named model configuration used by the comparison harness and stacking.
struct ModelSpec {
  std::string kind = "forest";  // forest | tree | ols | knn | boosted | stacked
  ForestParams forest;
  TreeParams tree;
  BoostParams boost;
  std::size_t knn_k = 5;
  std::size_t stack_folds = 5;
  std::vector<std::string> stack_bases = {"forest", "ols"};
};

std::unique_ptr<Regressor> fit_model(const ModelSpec& spec, const Dataset& data,
                                     std::uint64_t seed);
ModelFactory model_factory(const ModelSpec& spec, std::uint64_t seed);

// --- Persistence -------------------------------------------------------------

// {"format":"bhmodel/1","kind",...}; doubles round-trip exactly.
nlohmann::json model_to_json(const Regressor& model);
std::unique_ptr<Regressor> model_from_json(const nlohmann::json& doc);
void save_model(const Regressor& model, const std::filesystem::path& path);
std::unique_ptr<Regressor> load_model(const std::filesystem::path& path);

}  // namespace bh

#endif  // BH_MODELS_HPP_
