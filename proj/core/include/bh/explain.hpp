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

#ifndef BH_EXPLAIN_HPP_
#define BH_EXPLAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bh/models.hpp"
#include "bh/table.hpp"
#include "json.hpp"

namespace bh {

inline constexpr std::string_view kMethodRfVi = "rf_vi";
inline constexpr std::string_view kMethodPermutation = "permutation";
inline constexpr std::string_view kMethodShapley = "shapley";

// Per-feature importance scores from one method. rank[i] is the 1-based
// position of features[i] by descending score, ties by name.
struct ImportanceReport {
  std::string method;
  std::vector<std::string> features;
  std::vector<double> scores;
  std::vector<std::size_t> rank;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
  std::size_t background = 0;

  // Throws kValidation when ranks are not a permutation consistent with scores.
  void validate() const;
};

std::vector<std::size_t> rank_scores(std::span<const std::string> features,
                                     std::span<const double> scores);
ImportanceReport make_report(std::string method, std::vector<std::string> features,
                             std::vector<double> scores);

using Metric = std::function<double(std::span<const double> y, std::span<const double> pred)>;
double mse(std::span<const double> y, std::span<const double> pred);

// FI_j = mean over repeats of metric(y, f(X with column j permuted)) -
// metric(y, f(X)). Repeat k of feature j draws from sub_seed(sub_seed(seed, j), k).
ImportanceReport permutation_importance(const Regressor& model, const Dataset& data,
                                        std::size_t repeats, std::uint64_t seed,
                                        const Metric& metric = mse);

// Wraps rf_variable_importance in a report.
ImportanceReport rf_importance_report(const ForestModel& model, const Dataset& data,
                                      std::size_t repeats, std::uint64_t seed);

enum class ShapleyMode { kExact, kSampled };

inline constexpr std::size_t kMaxExactFeatures = 15;

struct ShapleyOptions {
  ShapleyMode mode = ShapleyMode::kExact;
  std::size_t samples = 2000;  // permutations, sampled mode
  std::uint64_t seed = 0;
};

struct ShapleyResult {
  double base = 0.0;  // mean model output over the background
  std::vector<double> phi;
};

// Interventional Shapley values: v(S) is the mean over background rows b of
// f(x on S, b elsewhere).
ShapleyResult shapley_values(const Regressor& model, std::span<const double> row,
                             const Dataset& background, const ShapleyOptions& options);

// Score per feature = mean |phi| over the rows of `data`; row r uses seed
// sub_seed(options.seed, r).
ImportanceReport shapley_global(const Regressor& model, const Dataset& data,
                                const Dataset& background, const ShapleyOptions& options);

// `n` rows drawn without replacement (all rows when n >= n_rows).
Dataset sample_rows(const Dataset& data, std::size_t n, std::uint64_t seed);

struct ConsensusRanking {
  std::vector<std::string> methods;
  std::vector<double> weights;
  std::vector<std::string> features;
  std::vector<double> fused;
  std::vector<double> mean_rank;
  std::vector<std::string> order;  // all features, best first
  std::vector<std::string> forced;
  std::vector<std::string> selected;
  std::size_t k = 0;
};

// Weighted Borda fusion: method score = n - rank + 1, fused = sum of
// weight * score. Forced features are selected first (in the given order),
// then the best remaining by fused score, ties by mean rank then name.
// Empty `weights` means equal weights.
ConsensusRanking consensus_select(std::span<const ImportanceReport> reports, std::size_t k,
                                  std::span<const double> weights = {},
                                  std::span<const std::string> forced = {});

void write_report_csv(const ImportanceReport& report, const std::filesystem::path& path);
ImportanceReport read_report_csv(const std::filesystem::path& path, std::string method);
nlohmann::json selection_to_json(const ConsensusRanking& ranking);
void write_selection(const ConsensusRanking& ranking, const std::filesystem::path& path);
// The `selected` list of a selection.json document.
std::vector<std::string> read_selection(const std::filesystem::path& path);

}  // namespace bh

#endif  // BH_EXPLAIN_HPP_
