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

#ifndef BH_PIPELINE_HPP_
#define BH_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bh/error.hpp"
#include "bh/evaluation.hpp"
#include "bh/explain.hpp"
#include "bh/models.hpp"
#include "bh/polygon.hpp"
#include "bh/raster.hpp"
#include "bh/sampling.hpp"
#include "bh/spectral.hpp"
#include "json.hpp"

namespace bh {

struct SelectionConfig {
  bool enabled = true;
  std::size_t k = 13;
  std::vector<double> weights;       // per method in {rf_vi, permutation, shapley}; empty = equal
  std::vector<std::string> forced;   // always selected
  std::size_t repeats = 5;           // permutation and RF importance repeats
  std::size_t shap_rows = 20;        // rows explained for the global Shapley ranking
  std::size_t shap_background = 20;  // background rows
  std::size_t shap_samples = 10;     // permutations per row (sampled mode)
};

struct PipelineConfig {
  std::vector<std::string> stacks;  // stack manifests
  std::string footprints;
  std::string ndsm;     // optional; footprint ref_height_m otherwise
  std::string regions;  // optional
  std::string features_dir = "features";
  std::string out_dir = "out";
  std::vector<std::string> recipe;  // feature names; empty = default recipe
  double buffer_m = 50.0;           // 0 disables the buffer
  double window_m = 50.0;           // 0 disables the moving window
  double clip_lo = 1.0;
  double clip_hi = 99.0;
  double bin_step = 0.01;
  ForestParams forest;
  SelectionConfig selection;
  std::uint64_t seed = 42;

  nlohmann::json to_json() const;
  // Unknown keys and ill-typed values raise kConfig.
  static PipelineConfig from_json(const nlohmann::json& doc);
  static PipelineConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  // Throws kConfig on out-of-domain values.
  void validate() const;
  FeatureRecipe feature_recipe() const;
};

// Prefixes any bh::Error raised by `fn` with the stage name.
template <class Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(stage) + ": " + e.what());
  }
}

// --- features -----------------------------------------------------------------

std::vector<RasterStack> load_stacks(const PipelineConfig& config);
FeatureRasters compute_features(const PipelineConfig& config);
// Writes <features_dir>; returns the number of feature rasters.
std::size_t cmd_features(const PipelineConfig& config);

// --- training -----------------------------------------------------------------

struct TrainResult {
  FeatureTable samples;  // assembled, in meters
  AssemblyReport assembly;
  BinnedTable training;  // clipped, log-transformed, binned
  std::vector<ImportanceReport> reports;
  std::optional<ConsensusRanking> selection;
  std::vector<std::string> features;  // model features, table order
  std::unique_ptr<Regressor> model;
  EvalReport train_eval;  // model on its own binned training rows
};

TrainResult train(const PipelineConfig& config, const FeatureRasters& features,
                  const FootprintSet& footprints, const RasterGrid* ndsm);
// Writes model.json, selection.json, importance_*.csv, samples.csv,
// training.csv, train_eval.json and assembly.json under out_dir.
TrainResult cmd_train(const PipelineConfig& config);

// --- prediction -----------------------------------------------------------------

// Per-pixel LHeight prediction (nodata where any model feature is nodata),
// window median over window_m (0 = none), exp back to meters, then masked to
// the union of footprints unless `unmasked`.
RasterGrid predict_heights(const Regressor& model, const FeatureRasters& features,
                           const FootprintSet& footprints, double window_m,
                           bool unmasked = false);
// Reads model features from the feature directory and writes heights.bhgr.
RasterGrid cmd_predict(const PipelineConfig& config, const std::filesystem::path& model_path,
                       const std::filesystem::path& output, bool unmasked = false);

// Median of the raster over each footprint's pixels.
std::vector<std::optional<double>> building_heights(const RasterGrid& heights,
                                                    const FootprintSet& footprints);

// --- evaluation -----------------------------------------------------------------

struct BuildingEvaluation {
  EvalReport report;  // in log space: ln(max(h, 1))
  std::size_t missing_prediction = 0;
  std::size_t missing_reference = 0;
};

// Per-building predicted vs reference heights. Buildings missing either side
// are counted and skipped.
BuildingEvaluation evaluate_buildings(std::span<const std::optional<double>> predicted,
                                      std::span<const std::optional<double>> reference);

// Reference heights from the nDSM, or from ref_height_m without one.
std::vector<std::optional<double>> reference_heights(const FootprintSet& footprints,
                                                     const RasterGrid* ndsm);

// --- comparison and sweeps ------------------------------------------------------

// Default comparison rows: tree, ols, forest, knn, boosted, stacked.
std::vector<NamedSpec> default_comparison_models(std::size_t n_trees);

struct SweepRow {
  double setting = 0.0;  // buffer_m = window_m = setting
  std::optional<EvalReport> report;
  std::string error;
};

// For each candidate: train on the train split of the footprints with
// buffer_m = window_m = candidate, predict, and evaluate on the held-out
// footprints. Rows are ranked by descending R^2; failed settings go last.
std::vector<SweepRow> sweep(const PipelineConfig& config, const FeatureRasters& features,
                            const FootprintSet& footprints, const RasterGrid* ndsm,
                            std::span<const double> candidates, double test_fraction);
std::string sweep_to_csv(std::span<const SweepRow> rows);

// --- aggregation ------------------------------------------------------------------

struct RegionStats {
  std::string id;
  std::size_t count = 0;  // buildings whose centroid lies in the region
  std::optional<double> mean_height_m;
  std::optional<double> max_height_m;
  double footprint_area_m2 = 0.0;
  double land_area_m2 = 0.0;
  double footprint_ratio = 0.0;
};

std::vector<RegionStats> aggregate(std::span<const std::optional<double>> heights,
                                   const FootprintSet& footprints, const FootprintSet& regions);
std::string regions_to_csv(std::span<const RegionStats> stats);

}  // namespace bh

#endif  // BH_PIPELINE_HPP_
