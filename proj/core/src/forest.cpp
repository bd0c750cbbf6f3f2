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
#include <cmath>

#include "bh/error.hpp"
#include "bh/models.hpp"

namespace bh {

std::size_t resolve_mtry(std::size_t mtry, std::size_t n_features) {
  if (n_features == 0) throw Error(ErrorKind::kData, "no features");
  if (mtry == 0) return std::max<std::size_t>(1, (n_features + 2) / 3);
  if (mtry > n_features) {
    throw Error(ErrorKind::kParameter, "mtry " + std::to_string(mtry) + " exceeds " +
                                           std::to_string(n_features) + " features");
  }
  return mtry;
}

ForestModel::ForestModel(std::vector<RegressionTree> trees,
                         std::vector<std::vector<std::uint32_t>> bootstrap, ForestParams params,
                         std::vector<std::string> features, std::size_t n_rows)
    : trees_(std::move(trees)),
      bootstrap_(std::move(bootstrap)),
      params_(params),
      n_rows_(n_rows) {
  features_ = std::move(features);
  if (trees_.empty()) throw Error(ErrorKind::kParameter, "forest has no trees");
  if (!bootstrap_.empty() && bootstrap_.size() != trees_.size()) {
    throw Error(ErrorKind::kShape, "bootstrap count does not match tree count");
  }
}

double ForestModel::predict_unchecked(std::span<const double> row) const {
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(row);
  return sum / static_cast<double>(trees_.size());
}

std::vector<std::vector<std::uint32_t>> ForestModel::oob_rows() const {
  if (bootstrap_.empty()) {
    throw Error(ErrorKind::kData, "forest carries no bootstrap record");
  }
  std::vector<std::vector<std::uint32_t>> out(trees_.size());
  std::vector<std::uint8_t> in_bag(n_rows_);
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (auto r : bootstrap_[t]) in_bag[r] = 1;
    for (std::uint32_t r = 0; r < n_rows_; ++r) {
      if (!in_bag[r]) out[t].push_back(r);
    }
  }
  return out;
}

namespace {

void check_forest_params(const Dataset& data, const ForestParams& params) {
  if (params.n_trees == 0) throw Error(ErrorKind::kParameter, "n_trees must be positive");
  if (params.min_leaf == 0) throw Error(ErrorKind::kParameter, "min_leaf must be positive");
  if (data.n_rows < 2) throw Error(ErrorKind::kData, "need at least 2 rows to fit a forest");
  resolve_mtry(params.mtry, data.n_features());
}

std::unique_ptr<ForestModel> grow(const Dataset& data, const ForestParams& params,
                                  std::vector<std::vector<std::uint32_t>> bootstraps,
                                  bool draw) {
  check_forest_params(data, params);
  const std::size_t mtry = resolve_mtry(params.mtry, data.n_features());
  const TreeParams tp{mtry, params.min_leaf, params.max_depth};
  if (draw) bootstraps.assign(params.n_trees, {});
  if (bootstraps.size() != params.n_trees) {
    throw Error(ErrorKind::kShape, "need one bootstrap per tree");
  }
  std::vector<RegressionTree> trees;
  trees.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(sub_seed(params.seed, t));
    auto& boot = bootstraps[t];
    if (draw) {
      boot.resize(data.n_rows);
      for (auto& r : boot) r = static_cast<std::uint32_t>(uniform_index(rng, data.n_rows));
    } else {
      for (auto r : boot) {
        if (r >= data.n_rows) throw Error(ErrorKind::kShape, "bootstrap row out of range");
      }
    }
    trees.push_back(fit_tree(data, boot, tp, &rng));
  }
  return std::make_unique<ForestModel>(std::move(trees), std::move(bootstraps), params,
                                       data.features, data.n_rows);
}

}  // namespace

std::unique_ptr<ForestModel> fit_forest(const Dataset& data, const ForestParams& params) {
  return grow(data, params, {}, true);
}

std::unique_ptr<ForestModel> fit_forest_with_bootstraps(
    const Dataset& data, const ForestParams& params,
    std::vector<std::vector<std::uint32_t>> bootstraps) {
  return grow(data, params, std::move(bootstraps), false);
}

OobResult oob_error(const ForestModel& model, const Dataset& data) {
  if (data.n_rows != model.n_training_rows()) {
    throw Error(ErrorKind::kShape, "OOB error needs the training dataset");
  }
  const auto oob = model.oob_rows();
  std::vector<double> sum(data.n_rows, 0.0);
  std::vector<std::size_t> count(data.n_rows, 0);
  for (std::size_t t = 0; t < oob.size(); ++t) {
    const auto& tree = model.trees()[t];
    for (auto r : oob[t]) {
      sum[r] += tree.predict(data.row(r));
      ++count[r];
    }
  }
  OobResult res;
  double se = 0.0;
  for (std::size_t r = 0; r < data.n_rows; ++r) {
    if (count[r] == 0) {
      ++res.skipped;
      continue;
    }
    const double e = data.y[r] - sum[r] / static_cast<double>(count[r]);
    se += e * e;
    ++res.scored;
  }
  if (res.scored == 0) throw Error(ErrorKind::kData, "no row has an out-of-bag tree");
  res.mse = se / static_cast<double>(res.scored);
  return res;
}

std::vector<double> rf_variable_importance(const ForestModel& model, const Dataset& data,
                                           std::size_t repeats, std::uint64_t seed) {
  if (repeats == 0) throw Error(ErrorKind::kParameter, "repeats must be positive");
  if (data.n_rows != model.n_training_rows() || data.n_features() != model.n_features()) {
    throw Error(ErrorKind::kShape, "variable importance needs the training dataset");
  }
  const std::size_t p = data.n_features();
  const auto oob = model.oob_rows();
  std::vector<double> total(p, 0.0);
  std::size_t scored_trees = 0;
  std::vector<double> row(p);
  std::vector<double> column;
  for (std::size_t t = 0; t < oob.size(); ++t) {
    const auto& rows = oob[t];
    if (rows.empty()) continue;
    ++scored_trees;
    const auto& tree = model.trees()[t];
    double base = 0.0;
    for (auto r : rows) {
      const double e = data.y[r] - tree.predict(data.row(r));
      base += e * e;
    }
    base /= static_cast<double>(rows.size());
    for (std::size_t f : tree.used_features()) {
      double acc = 0.0;
      for (std::size_t k = 0; k < repeats; ++k) {
        Rng rng(sub_seed(sub_seed(seed, t), f * repeats + k));
        column.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) column[i] = data.at(rows[i], f);
        shuffle(std::span<double>(column), rng);
        double mse = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const auto src = data.row(rows[i]);
          std::copy(src.begin(), src.end(), row.begin());
          row[f] = column[i];
          const double e = data.y[rows[i]] - tree.predict(row);
          mse += e * e;
        }
        acc += mse / static_cast<double>(rows.size()) - base;
      }
      total[f] += acc / static_cast<double>(repeats);
    }
  }
  if (scored_trees == 0) throw Error(ErrorKind::kData, "no tree has out-of-bag rows");
  for (auto& v : total) v /= static_cast<double>(scored_trees);
  return total;
}

}  // namespace bh
