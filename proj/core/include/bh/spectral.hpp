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

#ifndef BH_SPECTRAL_HPP_
#define BH_SPECTRAL_HPP_

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bh/polygon.hpp"
#include "bh/raster.hpp"

namespace bh {

inline constexpr double kEpsDiv = 1e-12;
inline constexpr double kEpsVar = 1e-12;
inline constexpr double kDefaultGamma = 10.0;

enum class IndexKind { kMNDWI, kNDVI, kNDWI, kLSWI, kNDBI, kVVH };

enum class StatKind {
  kMin,  // p0
  kMax,  // p100
  kMean,
  kMedian,  // p50
  kStdDev,
  kSkewness,
  kKurtosis,
  kP10,
  kP25,
  kP75,
  kP90,
  kInterquartileRange,
};

inline constexpr std::array<StatKind, 12> kAllStats = {
    StatKind::kMin,    StatKind::kMax,      StatKind::kMean,     StatKind::kMedian,
    StatKind::kStdDev, StatKind::kSkewness, StatKind::kKurtosis, StatKind::kP10,
    StatKind::kP25,    StatKind::kP75,      StatKind::kP90,      StatKind::kInterquartileRange};

inline constexpr std::array<std::string_view, 4> kGeometryFeatures = {
    "MBG_Width", "MBG_Length", "MBG_Orientation", "Near_Distance"};

bool is_geometry_feature(std::string_view name);

// Band labels for the spectral roles. Labels are free-form strings, so other
// sensors only need a different mapping.
struct BandMap {
  std::string green = "B3";
  std::string red = "B4";
  std::string nir = "B8";
  std::string swir = "B11";
  std::string vv = "VV";
  std::string vh = "VH";
};

std::string_view index_name(IndexKind kind);
std::optional<IndexKind> parse_index(std::string_view name);
// (first, second) band labels consumed by the index formula, in formula order.
std::array<std::string, 2> index_bands(IndexKind kind, const BandMap& bands);

// Suffix used in feature names, e.g. "skew" in "LSWI_skew".
std::string_view stat_name(StatKind kind);
// Accepts canonical names plus the aliases min/max/p0/p50/p100 and the
// "interquatile_range" spelling.
std::optional<StatKind> parse_stat(std::string_view name);

struct RecipeEntry {
  std::string signal;
  StatKind stat;

  std::string name() const;
};

struct FeatureRecipe {
  std::vector<RecipeEntry> entries;
  std::vector<std::string> geometry_features;
  double gamma = kDefaultGamma;  // VVH exponent base
  BandMap bands;

  // 13 signals x 12 statistics + 4 footprint shape features = 160 features.
  static FeatureRecipe default_recipe();
  // Parses "<signal>_<stat>" names and geometry feature names.
  static FeatureRecipe from_names(std::span<const std::string> names);

  std::vector<std::string> feature_names() const;
  // Throws kRecipe on duplicate names.
  void validate() const;
};

// (a - b) / (a + b); nodata where either input is nodata or |a + b| < 1e-12.
RasterGrid normalized_difference(const RasterGrid& a, const RasterGrid& b);

// VV * gamma^VH per pixel. Throws kParameter when gamma <= 0.
RasterGrid vvh_index(const RasterGrid& vv, const RasterGrid& vh, double gamma);

// Per-date signal series: a raw band's layers, or an index computed per date
// from layers sharing a timestamp. Dates lacking one of the bands are skipped.
// Throws kLookup for unknown signals or when no date is usable.
RasterStack signal_series(std::span<const RasterStack> stacks, const std::string& signal,
                          const BandMap& bands, double gamma);

// Per-pixel statistic over the valid values of `signal` through time.
// Skewness m3/m2^1.5 and excess kurtosis m4/m2^2 - 3 are nodata with fewer
// than three observations or m2 < 1e-12; stddev is the population form.
RasterGrid temporal_stat(const RasterStack& stack, const std::string& signal,
                         StatKind stat);

// All requested statistics from one pass over the series.
std::vector<RasterGrid> temporal_stats(const RasterStack& stack, const std::string& signal,
                                       std::span<const StatKind> stats);

// Statistic of a plain value list (reordered in place); nullopt when
// undefined.
std::optional<double> series_stat(std::span<double> values, StatKind stat);

// Ordered name -> grid map; all grids aligned.
class FeatureRasters {
 public:
  void add(std::string name, RasterGrid grid);
  const RasterGrid* find(std::string_view name) const;
  const RasterGrid& at(std::string_view name) const;
  std::span<const std::string> names() const { return names_; }
  std::span<const RasterGrid> grids() const { return grids_; }
  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }

 private:
  std::vector<std::string> names_;
  std::vector<RasterGrid> grids_;
};

// Per-footprint shape values burned into the footprint's pixels; every other
// pixel takes the value of its nearest footprint pixel, so moving windows
// around a building see that building's shape.
RasterGrid burn_geometry_feature(std::string_view name, const FootprintSet& footprints,
                                 const GridGeometry& geometry);

// One grid per recipe entry, named "<signal>_<stat>". Index signals are
// computed per date, then reduced through time. Geometry features need
// `footprints`. Throws kRecipe listing every unresolvable entry.
FeatureRasters build_feature_rasters(std::span<const RasterStack> stacks,
                                     const FeatureRecipe& recipe,
                                     const FootprintSet* footprints = nullptr);

// <dir>/<feature>.bhgr per feature plus manifest.json with names in order.
void write_feature_dir(const FeatureRasters& features, const std::filesystem::path& dir);
// Reads all features, or only `subset` (in the given order) when non-empty.
FeatureRasters read_feature_dir(const std::filesystem::path& dir,
                                std::span<const std::string> subset = {});
std::vector<std::string> read_feature_manifest(const std::filesystem::path& dir);

// Stack manifest: {"format":"bhstack/1","layers":[{"band","timestamp","path"}]}
// with paths relative to the manifest.
RasterStack read_stack(const std::filesystem::path& manifest);
void write_stack(const RasterStack& stack, const std::filesystem::path& dir,
                 const std::string& manifest_name = "stack.json");

}  // namespace bh

#endif  // BH_SPECTRAL_HPP_
