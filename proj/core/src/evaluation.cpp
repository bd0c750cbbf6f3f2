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
#include <cstdio>
#include <limits>
#include <numeric>

#include "bh/error.hpp"
#include "bh/evaluation.hpp"
#include "bh/sampling.hpp"
#include "bh/stats.hpp"

namespace bh {

SixNumber six_number(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::kData, "summary of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  SixNumber s;
  s.min = v.front();
  s.q1 = percentile_sorted<double>(v, 25.0);
  s.median = percentile_sorted<double>(v, 50.0);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  s.q3 = percentile_sorted<double>(v, 75.0);
  s.max = v.back();
  // Guard the mean against rounding outside [min, max].
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

std::optional<double> r_squared(std::span<const double> y, std::span<const double> pred) {
  if (y.size() != pred.size()) throw Error(ErrorKind::kShape, "prediction length mismatch");
  if (y.empty()) throw Error(ErrorKind::kData, "R^2 of an empty sample");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - pred[i]) * (y[i] - pred[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (!(ss_tot > 0.0)) return std::nullopt;
  return 1.0 - ss_res / ss_tot;
}

EvalReport evaluate(std::span<const double> y, std::span<const double> pred,
                    std::span<const double> bin_edges) {
  if (y.size() != pred.size()) throw Error(ErrorKind::kShape, "prediction length mismatch");
  if (y.empty()) throw Error(ErrorKind::kData, "nothing to evaluate");
  EvalReport rep;
  rep.n = y.size();
  rep.r2 = r_squared(y, pred);
  std::vector<double> res(y.size());
  double se = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    res[i] = y[i] - pred[i];
    se += res[i] * res[i];
  }
  rep.mse = se / static_cast<double>(y.size());
  rep.residuals = six_number(res);
  for (std::size_t b = 0; b + 1 < bin_edges.size(); ++b) {
    EvalBin bin{bin_edges[b], bin_edges[b + 1], 0, 0.0, std::nullopt};
    std::vector<double> by, bp;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] >= bin.lo && y[i] < bin.hi) {
        by.push_back(y[i]);
        bp.push_back(pred[i]);
      }
    }
    bin.n = by.size();
    if (!by.empty()) {
      double s = 0.0;
      for (std::size_t i = 0; i < by.size(); ++i) s += (by[i] - bp[i]) * (by[i] - bp[i]);
      bin.mse = s / static_cast<double>(by.size());
      bin.r2 = r_squared(by, bp);
    }
    rep.bins.push_back(bin);
  }
  return rep;
}

std::vector<double> unit_bin_edges(std::span<const double> y) {
  if (y.empty()) return {};
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  std::vector<double> edges;
  const double top = std::ceil(*hi) == *hi ? *hi + 1.0 : std::ceil(*hi);
  for (double e = std::floor(*lo); e <= top; e += 1.0) edges.push_back(e);
  return edges;
}

nlohmann::json EvalReport::to_json() const {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json bins_json = nlohmann::json::array();
  for (const auto& b : bins) {
    bins_json.push_back({{"lo", b.lo}, {"hi", b.hi}, {"n", b.n}, {"mse", b.mse}, {"r2", opt(b.r2)}});
  }
  return {{"n", n},
          {"r2", opt(r2)},
          {"mse", mse},
          {"residuals",
           {{"min", residuals.min},
            {"p25", residuals.q1},
            {"p50", residuals.median},
            {"mean", residuals.mean},
            {"p75", residuals.q3},
            {"max", residuals.max}}},
          {"bins", bins_json}};
}

ComparisonTable compare_models(const Dataset& data, std::span<const NamedSpec> models,
                               std::size_t n_splits, double test_fraction, std::uint64_t seed) {
  if (n_splits < 2) throw Error(ErrorKind::kParameter, "comparison needs at least 2 splits");
  if (models.empty()) throw Error(ErrorKind::kParameter, "no models to compare");
  ComparisonTable table;
  table.n_splits = n_splits;
  table.test_fraction = test_fraction;
  table.seed = seed;
  for (const auto& m : models) table.rows.push_back({m.name, {}, {}});
  for (std::size_t s = 0; s < n_splits; ++s) {
    const std::uint64_t split_seed = sub_seed(seed, s);
    const auto [train_idx, test_idx] = split_indices(data.n_rows, test_fraction, split_seed);
    const Dataset train = data.subset(train_idx);
    const Dataset test = data.subset(test_idx);
    for (std::size_t m = 0; m < models.size(); ++m) {
      const auto model = fit_model(models[m].spec, train, sub_seed(split_seed, m));
      const auto pred = model->predict_all(test);
      const auto r2 = r_squared(test.y, pred);
      table.rows[m].r2.push_back(r2 ? *r2 : std::numeric_limits<double>::quiet_NaN());
    }
  }
  for (auto& row : table.rows) {
    std::vector<double> finite;
    for (double v : row.r2) {
      if (std::isfinite(v)) finite.push_back(v);
    }
    if (finite.empty()) throw Error(ErrorKind::kData, "no split had a defined R^2");
    row.summary = six_number(finite);
  }
  return table;
}

std::string ComparisonTable::to_csv() const {
  std::string out = "model,min,q1,median,mean,q3,max\n";
  char buf[256];
  for (const auto& r : rows) {
    const auto& s = r.summary;
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.model.c_str(), s.min,
                  s.q1, s.median, s.mean, s.q3, s.max);
    out += buf;
  }
  return out;
}

}  // namespace bh
