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

#include <algorithm>
#include <numeric>

#include "bh/error.hpp"
#include "bh/models.hpp"

namespace bh {

double Regressor::predict(std::span<const double> row) const {
  if (row.size() != features_.size()) {
    throw Error(ErrorKind::kShape, "row has " + std::to_string(row.size()) +
                                       " values, model expects " +
                                       std::to_string(features_.size()));
  }
  return predict_unchecked(row);
}

std::vector<double> Regressor::predict_all(const Dataset& data) const {
  if (data.n_features() != features_.size()) {
    throw Error(ErrorKind::kShape, "dataset has " + std::to_string(data.n_features()) +
                                       " features, model expects " +
                                       std::to_string(features_.size()));
  }
  std::vector<double> out(data.n_rows);
  for (std::size_t r = 0; r < data.n_rows; ++r) out[r] = predict_unchecked(data.row(r));
  return out;
}

std::vector<double> Regressor::predict_table(const FeatureTable& table) const {
  // Columns are matched by name so column order in the table is irrelevant.
  std::vector<std::size_t> idx;
  std::string missing;
  for (const auto& f : features_) {
    if (auto i = table.find_column(f)) {
      idx.push_back(*i);
    } else {
      missing += " " + f;
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::kShape, "table lacks model features:" + missing);
  }
  std::vector<double> row(idx.size());
  std::vector<double> out(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t k = 0; k < idx.size(); ++k) row[k] = table.value(r, idx[k]);
    out[r] = predict_unchecked(row);
  }
  return out;
}

std::size_t RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes_[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

bool RegressionTree::uses_feature(std::size_t feature) const {
  return std::any_of(nodes_.begin(), nodes_.end(), [&](const TreeNode& n) {
    return !n.is_leaf() && static_cast<std::size_t>(n.feature) == feature;
  });
}

std::vector<std::size_t> RegressionTree::used_features() const {
  std::vector<std::size_t> out;
  for (const auto& n : nodes_) {
    if (!n.is_leaf()) out.push_back(static_cast<std::size_t>(n.feature));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeParams& params, Rng* rng)
      : data_(data), params_(params), rng_(rng) {
    const std::size_t p = data.n_features();
    mtry_ = params.mtry == 0 ? p : std::min(params.mtry, p);
    if (mtry_ < p && rng_ == nullptr) {
      throw Error(ErrorKind::kParameter, "feature subsampling requires a random stream");
    }
    pool_.resize(p);
    std::iota(pool_.begin(), pool_.end(), std::size_t{0});
  }

  std::vector<TreeNode> build(std::vector<std::uint32_t> rows) {
    rows_ = std::move(rows);
    nodes_.clear();
    grow(0, rows_.size(), 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
    bool found = false;
  };

  int grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const std::size_t n = end - begin;
    double sum = 0.0;
    double y_min = data_.y[rows_[begin]];
    double y_max = y_min;
    for (std::size_t i = begin; i < end; ++i) {
      const double y = data_.y[rows_[i]];
      sum += y;
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{-1, 0.0, -1, -1, sum / static_cast<double>(n), n});

    const bool depth_done = params_.max_depth != 0 && depth >= params_.max_depth;
    if (depth_done || n < 2 * params_.min_leaf || y_min == y_max) return index;

    const Split best = find_split(begin, end, sum);
    if (!best.found) return index;

    auto mid = std::stable_partition(
        rows_.begin() + static_cast<long>(begin), rows_.begin() + static_cast<long>(end),
        [&](std::uint32_t r) { return data_.at(r, best.feature) <= best.threshold; });
    const auto split_at = static_cast<std::size_t>(mid - rows_.begin());

    const int left = grow(begin, split_at, depth + 1);
    const int right = grow(split_at, end, depth + 1);
    TreeNode& node = nodes_[static_cast<std::size_t>(index)];
    node.feature = static_cast<int>(best.feature);
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  Split find_split(std::size_t begin, std::size_t end, double sum) {
    const std::size_t n = end - begin;
    const std::size_t p = data_.n_features();
    candidates_.clear();
    if (mtry_ < p) {
      for (std::size_t k = 0; k < mtry_; ++k) {
        const std::size_t j = k + uniform_index(*rng_, p - k);
        std::swap(pool_[k], pool_[j]);
        candidates_.push_back(pool_[k]);
      }
      std::sort(candidates_.begin(), candidates_.end());
    } else {
      candidates_.assign(pool_.begin(), pool_.end());
      std::sort(candidates_.begin(), candidates_.end());
    }

    Split best;
    const std::size_t min_leaf = std::max<std::size_t>(params_.min_leaf, 1);
    for (std::size_t f : candidates_) {
      pairs_.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t r = rows_[begin + i];
        pairs_[i] = {data_.at(r, f), data_.y[r]};
      }
      std::sort(pairs_.begin(), pairs_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (pairs_.front().first == pairs_.back().first) continue;
      double sum_left = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        sum_left += pairs_[i].second;
        const std::size_t n_left = i + 1;
        if (n_left < min_leaf) continue;
        if (n - n_left < min_leaf) break;
        if (!(pairs_[i].first < pairs_[i + 1].first)) continue;
        const double gain = split_gain(sum_left, n_left, sum - sum_left, n - n_left);
        if (gain > best.gain) {
          best = {f, split_threshold(pairs_[i].first, pairs_[i + 1].first), gain, true};
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const TreeParams& params_;
  Rng* rng_;
  std::size_t mtry_ = 0;
  std::vector<std::size_t> pool_;
  std::vector<std::size_t> candidates_;
  std::vector<std::uint32_t> rows_;
  std::vector<std::pair<double, double>> pairs_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

RegressionTree fit_tree(const Dataset& data, std::span<const std::uint32_t> rows,
                        const TreeParams& params, Rng* rng) {
  if (rows.empty()) throw Error(ErrorKind::kData, "cannot fit a tree on zero rows");
  if (data.n_features() == 0) throw Error(ErrorKind::kData, "cannot fit a tree without features");
  TreeBuilder builder(data, params, rng);
  return RegressionTree(builder.build(std::vector<std::uint32_t>(rows.begin(), rows.end())));
}

RegressionTree fit_tree(const Dataset& data, const TreeParams& params) {
  if (data.n_rows < 2 * std::max<std::size_t>(params.min_leaf, 1)) {
    throw Error(ErrorKind::kData, "need at least 2*min_leaf rows to fit a tree");
  }
  std::vector<std::uint32_t> rows(data.n_rows);
  std::iota(rows.begin(), rows.end(), 0u);
  return fit_tree(data, rows, TreeParams{0, params.min_leaf, params.max_depth}, nullptr);
}

TreeModel::TreeModel(RegressionTree tree, TreeParams params, std::vector<std::string> features)
    : tree_(std::move(tree)), params_(params) {
  features_ = std::move(features);
}

std::unique_ptr<TreeModel> fit_tree_model(const Dataset& data, const TreeParams& params) {
  return std::make_unique<TreeModel>(fit_tree(data, params), params, data.features);
}

}  // namespace bh
