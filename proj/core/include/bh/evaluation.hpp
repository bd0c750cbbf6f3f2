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

#ifndef BH_EVALUATION_HPP_
#define BH_EVALUATION_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bh/models.hpp"
#include "bh/table.hpp"
#include "json.hpp"

namespace bh {

// min, 1st quartile, median, mean, 3rd quartile, max.
struct SixNumber {
  double min = 0.0, q1 = 0.0, median = 0.0, mean = 0.0, q3 = 0.0, max = 0.0;
};

SixNumber six_number(std::span<const double> values);

struct EvalBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
  double mse = 0.0;
  std::optional<double> r2;
};

struct EvalReport {
  std::size_t n = 0;
  std::optional<double> r2;  // empty when the target has zero variance
  double mse = 0.0;
  SixNumber residuals;  // y - prediction
  std::vector<EvalBin> bins;

  nlohmann::json to_json() const;
};

std::optional<double> r_squared(std::span<const double> y, std::span<const double> pred);

// Optional breakdown over half-open target intervals [edges[i], edges[i+1]).
EvalReport evaluate(std::span<const double> y, std::span<const double> pred,
                    std::span<const double> bin_edges = {});

// Unit-width target intervals covering [floor(min y), ceil(max y)].
std::vector<double> unit_bin_edges(std::span<const double> y);

struct NamedSpec {
  std::string name;
  ModelSpec spec;
};

struct ComparisonRow {
  std::string model;
  std::vector<double> r2;  // per split; NaN when undefined
  SixNumber summary;
};

struct ComparisonTable {
  std::size_t n_splits = 0;
  double test_fraction = 0.0;
  std::uint64_t seed = 0;
  std::vector<ComparisonRow> rows;

  std::string to_csv() const;
};

// Every model sees the same n_splits random train/test partitions; split s
// uses sub_seed(seed, s) and model fits use sub_seed(split seed, model index).
ComparisonTable compare_models(const Dataset& data, std::span<const NamedSpec> models,
                               std::size_t n_splits, double test_fraction, std::uint64_t seed);

}  // namespace bh

#endif  // BH_EVALUATION_HPP_
