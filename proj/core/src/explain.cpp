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
#include <bit>
#include <cmath>
#include <numeric>

#include "bh/error.hpp"
#include "bh/explain.hpp"

namespace bh {

std::vector<std::size_t> rank_scores(std::span<const std::string> features,
                                     std::span<const double> scores) {
  if (features.size() != scores.size()) {
    throw Error(ErrorKind::kShape, "feature and score counts differ");
  }
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return features[a] < features[b];
  });
  std::vector<std::size_t> rank(features.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i + 1;
  return rank;
}

ImportanceReport make_report(std::string method, std::vector<std::string> features,
                             std::vector<double> scores) {
  ImportanceReport r;
  r.method = std::move(method);
  r.rank = rank_scores(features, scores);
  r.features = std::move(features);
  r.scores = std::move(scores);
  return r;
}

void ImportanceReport::validate() const {
  const std::size_t n = features.size();
  if (scores.size() != n || rank.size() != n) {
    throw Error(ErrorKind::kValidation, "report '" + method + "' has ragged columns");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error(ErrorKind::kValidation, "non-finite importance score");
  }
  if (rank != rank_scores(features, scores)) {
    throw Error(ErrorKind::kValidation, "report '" + method + "' ranks disagree with scores");
  }
}

double mse(std::span<const double> y, std::span<const double> pred) {
  if (y.empty()) throw Error(ErrorKind::kData, "MSE of an empty sample");
  if (y.size() != pred.size()) throw Error(ErrorKind::kShape, "MSE length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - pred[i];
    s += e * e;
  }
  return s / static_cast<double>(y.size());
}

namespace {

std::vector<std::vector<std::size_t>> trees_by_feature(const ForestModel& forest, std::size_t p) {
  std::vector<std::vector<std::size_t>> out(p);
  const auto trees = forest.trees();
  for (std::size_t t = 0; t < trees.size(); ++t) {
    for (auto f : trees[t].used_features()) out[f].push_back(t);
  }
  return out;
}

void check_width(const Regressor& model, const Dataset& data) {
  if (data.n_features() != model.n_features()) {
    throw Error(ErrorKind::kShape, "dataset width " + std::to_string(data.n_features()) +
                                       " does not match model width " +
                                       std::to_string(model.n_features()));
  }
}

}  // namespace

ImportanceReport permutation_importance(const Regressor& model, const Dataset& data,
                                        std::size_t repeats, std::uint64_t seed,
                                        const Metric& metric) {
  if (repeats == 0) throw Error(ErrorKind::kParameter, "repeats must be positive");
  if (data.n_rows == 0) throw Error(ErrorKind::kData, "permutation importance on an empty table");
  check_width(model, data);
  const std::size_t n = data.n_rows;
  const std::size_t p = data.n_features();
  const auto base_pred = model.predict_all(data);
  const double e_orig = metric(data.y, base_pred);

  const ForestModel* forest = model.as_forest();
  std::vector<std::vector<double>> per_tree;  // [tree][row]
  std::vector<std::vector<std::size_t>> users;
  if (forest != nullptr) {
    const auto trees = forest->trees();
    per_tree.assign(trees.size(), std::vector<double>(n));
    for (std::size_t t = 0; t < trees.size(); ++t) {
      for (std::size_t r = 0; r < n; ++r) per_tree[t][r] = trees[t].predict(data.row(r));
    }
    users = trees_by_feature(*forest, p);
  }

  std::vector<double> scores(p, 0.0);
  std::vector<double> pred(n);
  std::vector<double> row(p);
  std::vector<double> column(n);
  std::vector<std::uint8_t> redo;
  for (std::size_t j = 0; j < p; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < repeats; ++k) {
      Rng rng(sub_seed(sub_seed(seed, j), k));
      const auto perm = permutation(n, rng);
      for (std::size_t r = 0; r < n; ++r) column[r] = data.at(perm[r], j);
      if (forest != nullptr) {
        const auto trees = forest->trees();
        redo.assign(trees.size(), 0);
        for (auto t : users[j]) redo[t] = 1;
        for (std::size_t r = 0; r < n; ++r) {
          const auto src = data.row(r);
          std::copy(src.begin(), src.end(), row.begin());
          row[j] = column[r];
          double sum = 0.0;
          for (std::size_t t = 0; t < trees.size(); ++t) {
            sum += redo[t] ? trees[t].predict(row) : per_tree[t][r];
          }
          pred[r] = sum / static_cast<double>(trees.size());
        }
      } else {
        for (std::size_t r = 0; r < n; ++r) {
          const auto src = data.row(r);
          std::copy(src.begin(), src.end(), row.begin());
          row[j] = column[r];
          pred[r] = model.predict(row);
        }
      }
      acc += metric(data.y, pred) - e_orig;
    }
    scores[j] = acc / static_cast<double>(repeats);
  }
  auto report = make_report(std::string(kMethodPermutation), data.features, std::move(scores));
  report.repeats = repeats;
  report.seed = seed;
  return report;
}

ImportanceReport rf_importance_report(const ForestModel& model, const Dataset& data,
                                      std::size_t repeats, std::uint64_t seed) {
  auto report = make_report(std::string(kMethodRfVi), data.features,
                            rf_variable_importance(model, data, repeats, seed));
  report.repeats = repeats;
  report.seed = seed;
  return report;
}

namespace {

ShapleyResult shapley_exact(const Regressor& model, std::span<const double> x,
                            const Dataset& bg) {
  const std::size_t p = x.size();
  const std::size_t n_sets = std::size_t{1} << p;
  std::vector<double> v(n_sets);
  std::vector<double> z(p);
  for (std::size_t s = 0; s < n_sets; ++s) {
    double sum = 0.0;
    for (std::size_t b = 0; b < bg.n_rows; ++b) {
      const auto brow = bg.row(b);
      for (std::size_t j = 0; j < p; ++j) z[j] = (s >> j) & 1u ? x[j] : brow[j];
      sum += model.predict(z);
    }
    v[s] = sum / static_cast<double>(bg.n_rows);
  }
  // weight[s] = s! (p - s - 1)! / p!
  std::vector<double> fact(p + 1, 1.0);
  for (std::size_t i = 1; i <= p; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
  std::vector<double> weight(p);
  for (std::size_t s = 0; s < p; ++s) weight[s] = fact[s] * fact[p - s - 1] / fact[p];

  ShapleyResult out;
  out.base = v[0];
  out.phi.assign(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    double acc = 0.0;
    for (std::size_t s = 0; s < n_sets; ++s) {
      if (s & bit) continue;
      acc += weight[static_cast<std::size_t>(std::popcount(s))] * (v[s | bit] - v[s]);
    }
    out.phi[i] = acc;
  }
  return out;
}

ShapleyResult shapley_sampled(const Regressor& model, std::span<const double> x,
                              const Dataset& bg, std::size_t samples, std::uint64_t seed) {
  const std::size_t p = x.size();
  const std::size_t nb = bg.n_rows;
  ShapleyResult out;
  out.phi.assign(p, 0.0);

  const ForestModel* forest = model.as_forest();
  std::vector<std::vector<std::size_t>> users;
  std::vector<std::vector<double>> bg_tree;  // [b][tree]
  std::vector<double> bg_pred(nb);
  if (forest != nullptr) {
    const auto trees = forest->trees();
    users = trees_by_feature(*forest, p);
    bg_tree.assign(nb, std::vector<double>(trees.size()));
    for (std::size_t b = 0; b < nb; ++b) {
      double sum = 0.0;
      for (std::size_t t = 0; t < trees.size(); ++t) {
        bg_tree[b][t] = trees[t].predict(bg.row(b));
        sum += bg_tree[b][t];
      }
      bg_pred[b] = sum / static_cast<double>(trees.size());
    }
  } else {
    for (std::size_t b = 0; b < nb; ++b) bg_pred[b] = model.predict(bg.row(b));
  }
  out.base = std::accumulate(bg_pred.begin(), bg_pred.end(), 0.0) / static_cast<double>(nb);

  std::vector<double> z(p);
  std::vector<double> vals;
  for (std::size_t s = 0; s < samples; ++s) {
    Rng rng(sub_seed(seed, s));
    const auto order = permutation(p, rng);
    for (std::size_t b = 0; b < nb; ++b) {
      const auto brow = bg.row(b);
      std::copy(brow.begin(), brow.end(), z.begin());
      double prev = bg_pred[b];
      double sum = 0.0;
      if (forest != nullptr) {
        vals = bg_tree[b];
        sum = prev * static_cast<double>(vals.size());
      }
      for (std::size_t j : order) {
        if (z[j] == x[j]) continue;
        z[j] = x[j];
        double cur;
        if (forest != nullptr) {
          const auto trees = forest->trees();
          for (auto t : users[j]) {
            const double nv = trees[t].predict(z);
            sum += nv - vals[t];
            vals[t] = nv;
          }
          cur = sum / static_cast<double>(vals.size());
        } else {
          cur = model.predict(z);
        }
        out.phi[j] += cur - prev;
        prev = cur;
      }
    }
  }
  const double denom = static_cast<double>(samples) * static_cast<double>(nb);
  for (auto& v : out.phi) v /= denom;
  return out;
}

}  // namespace

ShapleyResult shapley_values(const Regressor& model, std::span<const double> row,
                             const Dataset& background, const ShapleyOptions& options) {
  if (background.n_rows == 0) throw Error(ErrorKind::kData, "Shapley background is empty");
  check_width(model, background);
  if (row.size() != model.n_features()) {
    throw Error(ErrorKind::kShape, "row width does not match the model");
  }
  if (options.mode == ShapleyMode::kExact) {
    if (row.size() > kMaxExactFeatures) {
      throw Error(ErrorKind::kParameter,
                  "exact Shapley supports at most " + std::to_string(kMaxExactFeatures) +
                      " features; use sampled mode for " + std::to_string(row.size()));
    }
    return shapley_exact(model, row, background);
  }
  if (options.samples == 0) throw Error(ErrorKind::kParameter, "samples must be positive");
  return shapley_sampled(model, row, background, options.samples, options.seed);
}

ImportanceReport shapley_global(const Regressor& model, const Dataset& data,
                                const Dataset& background, const ShapleyOptions& options) {
  if (data.n_rows == 0) throw Error(ErrorKind::kData, "Shapley importance on an empty table");
  std::vector<double> scores(data.n_features(), 0.0);
  for (std::size_t r = 0; r < data.n_rows; ++r) {
    ShapleyOptions o = options;
    o.seed = sub_seed(options.seed, r);
    const auto res = shapley_values(model, data.row(r), background, o);
    for (std::size_t j = 0; j < scores.size(); ++j) scores[j] += std::abs(res.phi[j]);
  }
  for (auto& s : scores) s /= static_cast<double>(data.n_rows);
  auto report = make_report(std::string(kMethodShapley), data.features, std::move(scores));
  report.repeats = options.mode == ShapleyMode::kSampled ? options.samples : 0;
  report.seed = options.seed;
  report.background = background.n_rows;
  return report;
}

Dataset sample_rows(const Dataset& data, std::size_t n, std::uint64_t seed) {
  if (n >= data.n_rows) return data;
  Rng rng(seed);
  auto perm = permutation(data.n_rows, rng);
  perm.resize(n);
  std::sort(perm.begin(), perm.end());
  return data.subset(perm);
}

}  // namespace bh
