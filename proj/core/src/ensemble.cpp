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
#include <numeric>

#include "bh/error.hpp"
#include "bh/models.hpp"
#include "linalg.hpp"

namespace bh {

// --- boosting ---

BoostedModel::BoostedModel(double initial, std::vector<RegressionTree> stages, BoostParams params,
                           std::vector<std::string> features, std::vector<double> train_mse)
    : initial_(initial),
      stages_(std::move(stages)),
      params_(params),
      train_mse_(std::move(train_mse)) {
  features_ = std::move(features);
}

double BoostedModel::predict_unchecked(std::span<const double> row) const {
  double v = initial_;
  for (const auto& t : stages_) v += params_.shrinkage * t.predict(row);
  return v;
}

std::unique_ptr<BoostedModel> fit_boosted(const Dataset& data, const BoostParams& params) {
  if (params.n_stages == 0) throw Error(ErrorKind::kParameter, "n_stages must be positive");
  if (!(params.shrinkage > 0.0 && params.shrinkage <= 1.0)) {
    throw Error(ErrorKind::kParameter, "shrinkage must lie in (0, 1]");
  }
  if (data.n_rows == 0) throw Error(ErrorKind::kData, "cannot boost on zero rows");
  const double init =
      std::accumulate(data.y.begin(), data.y.end(), 0.0) / static_cast<double>(data.n_rows);
  Dataset work = data;
  std::vector<double> fitted(data.n_rows, init);
  auto mse = [&] {
    double s = 0.0;
    for (std::size_t r = 0; r < data.n_rows; ++r) {
      const double e = data.y[r] - fitted[r];
      s += e * e;
    }
    return s / static_cast<double>(data.n_rows);
  };
  std::vector<double> history{mse()};
  std::vector<RegressionTree> stages;
  const TreeParams tp{0, params.min_leaf, params.max_depth};
  for (std::size_t k = 0; k < params.n_stages; ++k) {
    for (std::size_t r = 0; r < data.n_rows; ++r) work.y[r] = data.y[r] - fitted[r];
    stages.push_back(fit_tree(work, tp));
    for (std::size_t r = 0; r < data.n_rows; ++r) {
      fitted[r] += params.shrinkage * stages.back().predict(data.row(r));
    }
    history.push_back(mse());
  }
  return std::make_unique<BoostedModel>(init, std::move(stages), params, data.features,
                                        std::move(history));
}

// --- KNN ---

KnnModel::KnnModel(std::size_t k, std::vector<double> mean, std::vector<double> scale,
                   std::vector<double> x_std, std::vector<double> y,
                   std::vector<std::string> features)
    : k_(k),
      mean_(std::move(mean)),
      scale_(std::move(scale)),
      x_std_(std::move(x_std)),
      y_(std::move(y)) {
  features_ = std::move(features);
  const std::size_t p = features_.size();
  if (mean_.size() != p || scale_.size() != p || x_std_.size() != y_.size() * p) {
    throw Error(ErrorKind::kShape, "inconsistent KNN model arrays");
  }
  if (k_ == 0 || k_ > y_.size()) {
    throw Error(ErrorKind::kParameter, "k must lie in [1, n_rows]");
  }
}

double KnnModel::predict_unchecked(std::span<const double> row) const {
  const std::size_t p = features_.size();
  const std::size_t n = y_.size();
  std::vector<double> q(p);
  for (std::size_t j = 0; j < p; ++j) q[j] = (row[j] - mean_[j]) / scale_[j];
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t r = 0; r < n; ++r) {
    double d = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double e = x_std_[r * p + j] - q[j];
      d += e * e;
    }
    dist[r] = {d, r};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k_), dist.end());
  double s = 0.0;
  for (std::size_t i = 0; i < k_; ++i) s += y_[dist[i].second];
  return s / static_cast<double>(k_);
}

std::unique_ptr<KnnModel> fit_knn(const Dataset& data, std::size_t k) {
  if (k == 0 || k > data.n_rows) throw Error(ErrorKind::kParameter, "k must lie in [1, n_rows]");
  const std::size_t p = data.n_features();
  const std::size_t n = data.n_rows;
  std::vector<double> mean(p, 0.0), scale(p, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < p; ++j) mean[j] += data.at(r, j);
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < p; ++j) {
      const double e = data.at(r, j) - mean[j];
      scale[j] += e * e;
    }
  }
  for (auto& s : scale) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 0.0)) s = 1.0;
  }
  std::vector<double> x_std(n * p);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < p; ++j) x_std[r * p + j] = (data.at(r, j) - mean[j]) / scale[j];
  }
  return std::make_unique<KnnModel>(k, std::move(mean), std::move(scale), std::move(x_std),
                                    data.y, data.features);
}

double knn_predict(const Dataset& data, std::span<const double> row, std::size_t k) {
  return fit_knn(data, k)->predict(row);
}

// --- stacking ---

StackedModel::StackedModel(std::vector<std::unique_ptr<Regressor>> bases, double intercept,
                           std::vector<double> weights, bool used_ridge,
                           std::vector<std::string> features)
    : bases_(std::move(bases)),
      intercept_(intercept),
      weights_(std::move(weights)),
      used_ridge_(used_ridge) {
  features_ = std::move(features);
  if (bases_.size() != weights_.size()) {
    throw Error(ErrorKind::kShape, "meta weight count does not match base count");
  }
}

double StackedModel::predict_unchecked(std::span<const double> row) const {
  double v = intercept_;
  for (std::size_t b = 0; b < bases_.size(); ++b) v += weights_[b] * bases_[b]->predict(row);
  return v;
}

std::unique_ptr<StackedModel> fit_stacked(const Dataset& data,
                                          std::span<const ModelFactory> bases,
                                          std::size_t folds, std::uint64_t seed) {
  if (bases.size() < 2) throw Error(ErrorKind::kParameter, "stacking needs at least 2 bases");
  if (folds < 2) throw Error(ErrorKind::kParameter, "stacking needs at least 2 folds");
  if (folds > data.n_rows) throw Error(ErrorKind::kData, "more folds than rows");
  const std::size_t n = data.n_rows;
  const std::size_t nb = bases.size();

  Rng rng(seed);
  const auto order = permutation(n, rng);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = i % folds;

  std::vector<double> meta_x(n * nb);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t r = 0; r < n; ++r) (fold_of[r] == f ? test : train).push_back(r);
    const Dataset part = data.subset(train);
    for (std::size_t b = 0; b < nb; ++b) {
      const auto model = bases[b](part);
      for (auto r : test) meta_x[r * nb + b] = model->predict(data.row(r));
    }
  }
  auto ls = detail::least_squares(meta_x, data.y, n, nb, kMetaRidge);

  std::vector<std::unique_ptr<Regressor>> final_bases;
  for (std::size_t b = 0; b < nb; ++b) final_bases.push_back(bases[b](data));
  return std::make_unique<StackedModel>(std::move(final_bases), ls.intercept, std::move(ls.coef),
                                        ls.used_ridge, data.features);
}

// --- specs ---

std::unique_ptr<Regressor> fit_model(const ModelSpec& spec, const Dataset& data,
                                     std::uint64_t seed) {
  if (spec.kind == "forest") {
    ForestParams p = spec.forest;
    p.seed = seed;
    return fit_forest(data, p);
  }
  if (spec.kind == "tree") return fit_tree_model(data, spec.tree);
  if (spec.kind == "ols") return fit_ols(data);
  if (spec.kind == "knn") return fit_knn(data, std::min(spec.knn_k, data.n_rows));
  if (spec.kind == "boosted") return fit_boosted(data, spec.boost);
  if (spec.kind == "stacked") {
    std::vector<ModelFactory> factories;
    for (std::size_t i = 0; i < spec.stack_bases.size(); ++i) {
      if (spec.stack_bases[i] == "stacked") {
        throw Error(ErrorKind::kConfig, "a stacked model cannot be its own base");
      }
      ModelSpec base = spec;
      base.kind = spec.stack_bases[i];
      factories.push_back(model_factory(base, sub_seed(seed, i)));
    }
    return fit_stacked(data, factories, spec.stack_folds, sub_seed(seed, 0xf01d));
  }
  throw Error(ErrorKind::kConfig, "unknown model kind '" + spec.kind + "'");
}

ModelFactory model_factory(const ModelSpec& spec, std::uint64_t seed) {
  return [spec, seed](const Dataset& data) { return fit_model(spec, data, seed); };
}

}  // namespace bh
