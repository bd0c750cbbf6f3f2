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

#ifndef BH_SAMPLING_HPP_
#define BH_SAMPLING_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bh/polygon.hpp"
#include "bh/raster.hpp"
#include "bh/spectral.hpp"
#include "bh/table.hpp"

namespace bh {

inline constexpr const char* kHeightColumn = "height_m";
inline constexpr const char* kLogHeightColumn = "LHeight";

enum class DropReason {
  kSubPixelFootprint,  // rasterized footprint covers no pixel center
  kNoCoverage,         // no valid reference height pixel under the footprint
  kNoTarget,           // neither nDSM nor ref_height_m available
  kMissingFeature,     // a feature has no valid pixel in the zone
  kNoNeighbor,         // Near_Distance undefined (single footprint)
};

const char* to_string(DropReason reason);

struct DroppedRow {
  std::string id;
  DropReason reason;
  std::string detail;
};

struct AssemblyReport {
  std::size_t kept = 0;
  std::vector<DroppedRow> dropped;
};

// Median of valid grid values under the mask; nullopt when there are none.
std::optional<double> zonal_median(const RasterGrid& grid, const MaskGrid& mask);
std::optional<double> zonal_median(const RasterGrid& grid, std::span<const std::size_t> pixels);

struct HeightOutcome {
  std::optional<double> height_m;
  DropReason reason = DropReason::kNoCoverage;  // meaningful when height_m is empty
};

// Zonal median of the height raster over the (unbuffered) footprint.
HeightOutcome reference_height(const RasterGrid& ndsm, const Footprint& footprint);

// Pixel indices of buffer_mask(rasterize(footprint), buffer_m).
std::vector<std::size_t> zone_pixels(const Footprint& footprint, const GridGeometry& geometry,
                                     double buffer_m);

struct AssemblyOptions {
  double buffer_m = 50.0;
  // Reference height raster; when null, Footprint::ref_height_m is used.
  const RasterGrid* ndsm = nullptr;
};

// One row per surviving footprint: zonal medians of every raster feature over
// the buffered zone, shape features straight from the footprint geometry, and
// the reference height in meters as target column "height_m".
FeatureTable assemble_samples(const FeatureRasters& features, const FootprintSet& footprints,
                              const AssemblyOptions& options, AssemblyReport* report = nullptr);

struct BinnedTable {
  FeatureTable table;
  double start = 0.0;
  double step = 0.01;
  std::size_t count = 0;  // bins spanned from the first to the last nonempty bin
  std::vector<long> bin_index;              // per row, ascending
  std::vector<std::size_t> source_count;    // per row, >= 1
};

// Rows whose target lies inside [P_lo, P_hi] of the targets.
FeatureTable clip_target(const FeatureTable& table, double lo_pct, double hi_pct);

// t -> ln(max(t, 1)); the target column is renamed to "LHeight".
FeatureTable log_transform_target(const FeatureTable& table);

// Half-open bins [k*step, (k+1)*step) of the target, anchored at 0. One row
// per nonempty bin holding per-column medians of its members.
BinnedTable bin_by_target(const FeatureTable& table, double step);

// clip_target -> log_transform_target -> bin_by_target.
BinnedTable prepare_training(const FeatureTable& table, double lo_pct = 1.0,
                             double hi_pct = 99.0, double bin_step = 0.01);

// Deterministic shuffle by seed; test size is ceil(fraction * n), at least 1
// and at most n - 1.
std::pair<FeatureTable, FeatureTable> split(const FeatureTable& table, double test_fraction,
                                            std::uint64_t seed);
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double test_fraction, std::uint64_t seed);

}  // namespace bh

#endif  // BH_SAMPLING_HPP_
