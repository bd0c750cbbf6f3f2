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

#include "bh/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "bh/error.hpp"
#include "bh/geometry.hpp"
#include "bh/stats.hpp"
#include "json.hpp"

namespace bh {

bool is_geometry_feature(std::string_view name) {
  return std::find(kGeometryFeatures.begin(), kGeometryFeatures.end(), name) !=
         kGeometryFeatures.end();
}

std::string_view index_name(IndexKind kind) {
  switch (kind) {
    case IndexKind::kMNDWI: return "MNDWI";
    case IndexKind::kNDVI: return "NDVI";
    case IndexKind::kNDWI: return "NDWI";
    case IndexKind::kLSWI: return "LSWI";
    case IndexKind::kNDBI: return "NDBI";
    case IndexKind::kVVH: return "VVH";
  }
  return "";
}

std::optional<IndexKind> parse_index(std::string_view name) {
  for (IndexKind k : {IndexKind::kMNDWI, IndexKind::kNDVI, IndexKind::kNDWI,
                      IndexKind::kLSWI, IndexKind::kNDBI, IndexKind::kVVH}) {
    if (index_name(k) == name) return k;
  }
  return std::nullopt;
}

std::array<std::string, 2> index_bands(IndexKind kind, const BandMap& b) {
  switch (kind) {
    case IndexKind::kMNDWI: return {b.green, b.swir};
    case IndexKind::kNDVI: return {b.nir, b.red};
    case IndexKind::kNDWI: return {b.green, b.nir};
    case IndexKind::kLSWI: return {b.nir, b.swir};
    case IndexKind::kNDBI: return {b.swir, b.nir};
    case IndexKind::kVVH: return {b.vv, b.vh};
  }
  return {};
}

std::string_view stat_name(StatKind kind) {
  switch (kind) {
    case StatKind::kMin: return "p0";
    case StatKind::kMax: return "p100";
    case StatKind::kMean: return "mean";
    case StatKind::kMedian: return "median";
    case StatKind::kStdDev: return "stdDev";
    case StatKind::kSkewness: return "skew";
    case StatKind::kKurtosis: return "kurtosis";
    case StatKind::kP10: return "p10";
    case StatKind::kP25: return "p25";
    case StatKind::kP75: return "p75";
    case StatKind::kP90: return "p90";
    case StatKind::kInterquartileRange: return "interquartile_range";
  }
  return "";
}

std::optional<StatKind> parse_stat(std::string_view name) {
  for (StatKind k : kAllStats) {
    if (stat_name(k) == name) return k;
  }
  if (name == "min") return StatKind::kMin;
  if (name == "max") return StatKind::kMax;
  if (name == "p50") return StatKind::kMedian;
  if (name == "stddev") return StatKind::kStdDev;
  if (name == "skewness") return StatKind::kSkewness;
  if (name == "iqr" || name == "interquatile_range") return StatKind::kInterquartileRange;
  return std::nullopt;
}

std::string RecipeEntry::name() const {
  return signal + "_" + std::string(stat_name(stat));
}

FeatureRecipe FeatureRecipe::default_recipe() {
  static const char* kSignals[] = {"B3",   "B4",   "B5",    "B6",   "B8", "NDVI", "NDWI",
                                   "MNDWI", "LSWI", "NDBI", "VV",   "VH", "VVH"};
  FeatureRecipe r;
  for (const char* s : kSignals) {
    for (StatKind k : kAllStats) r.entries.push_back({s, k});
  }
  for (std::string_view g : kGeometryFeatures) r.geometry_features.emplace_back(g);
  return r;
}

FeatureRecipe FeatureRecipe::from_names(std::span<const std::string> names) {
  FeatureRecipe r;
  std::vector<std::string> bad;
  for (const std::string& name : names) {
    if (is_geometry_feature(name)) {
      r.geometry_features.push_back(name);
      continue;
    }
    // Stat suffixes may contain '_' (interquartile_range), so try every split.
    bool ok = false;
    for (std::size_t pos = name.find('_'); pos != std::string::npos;
         pos = name.find('_', pos + 1)) {
      if (auto stat = parse_stat(std::string_view(name).substr(pos + 1))) {
        r.entries.push_back({name.substr(0, pos), *stat});
        ok = true;
        break;
      }
    }
    if (!ok) bad.push_back(name);
  }
  if (!bad.empty()) {
    std::string msg = "cannot parse feature names:";
    for (const auto& b : bad) msg += " " + b;
    throw Error(ErrorKind::kRecipe, msg);
  }
  r.validate();
  return r;
}

std::vector<std::string> FeatureRecipe::feature_names() const {
  std::vector<std::string> out;
  out.reserve(entries.size() + geometry_features.size());
  for (const auto& e : entries) out.push_back(e.name());
  for (const auto& g : geometry_features) out.push_back(g);
  return out;
}

void FeatureRecipe::validate() const {
  auto names = feature_names();
  std::sort(names.begin(), names.end());
  auto dup = std::adjacent_find(names.begin(), names.end());
  if (dup != names.end()) {
    throw Error(ErrorKind::kRecipe, "duplicate feature name " + *dup);
  }
  for (const auto& g : geometry_features) {
    if (!is_geometry_feature(g)) {
      throw Error(ErrorKind::kRecipe, "unknown geometry feature " + g);
    }
  }
  if (!(gamma > 0.0)) throw Error(ErrorKind::kParameter, "gamma must be positive");
}

RasterGrid normalized_difference(const RasterGrid& a, const RasterGrid& b) {
  require_aligned(a.geometry(), b.geometry(), "normalized difference");
  RasterGrid out(a.geometry(), a.nodata());
  const auto va = a.values();
  const auto vb = b.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    if (a.is_nodata(va[i]) || b.is_nodata(vb[i])) continue;
    const double x = va[i];
    const double y = vb[i];
    const double sum = x + y;
    if (std::abs(sum) < kEpsDiv) continue;
    dst[i] = static_cast<float>((x - y) / sum);
  }
  return out;
}

RasterGrid vvh_index(const RasterGrid& vv, const RasterGrid& vh, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorKind::kParameter, "VVH gamma must be positive");
  require_aligned(vv.geometry(), vh.geometry(), "VVH");
  RasterGrid out(vv.geometry(), vv.nodata());
  const auto a = vv.values();
  const auto b = vh.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (vv.is_nodata(a[i]) || vh.is_nodata(b[i])) continue;
    const double v = static_cast<double>(a[i]) * std::pow(gamma, static_cast<double>(b[i]));
    if (std::isfinite(v)) dst[i] = static_cast<float>(v);
  }
  return out;
}

namespace {

struct BandLayers {
  std::vector<const LayerLabel*> labels;
  std::vector<const RasterGrid*> grids;
};

std::map<std::string, BandLayers> index_layers(std::span<const RasterStack> stacks) {
  std::map<std::string, BandLayers> out;
  for (const RasterStack& s : stacks) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto& b = out[s.labels()[i].band];
      b.labels.push_back(&s.labels()[i]);
      b.grids.push_back(&s.layers()[i]);
    }
  }
  return out;
}

}  // namespace

RasterStack signal_series(std::span<const RasterStack> stacks, const std::string& signal,
                          const BandMap& bands, double gamma) {
  if (stacks.empty()) throw Error(ErrorKind::kLookup, "no raster stacks given");
  const auto layers = index_layers(stacks);
  RasterStack out(stacks.front().geometry());
  const auto kind = parse_index(signal);
  if (!kind) {
    auto it = layers.find(signal);
    if (it == layers.end()) {
      throw Error(ErrorKind::kLookup, "signal '" + signal + "' is not a band in the stack");
    }
    for (std::size_t i = 0; i < it->second.grids.size(); ++i) {
      out.add({signal, it->second.labels[i]->timestamp}, *it->second.grids[i]);
    }
    return out;
  }
  const auto [first, second] = index_bands(*kind, bands);
  auto fa = layers.find(first);
  auto fb = layers.find(second);
  std::string missing;
  if (fa == layers.end()) missing += " " + first;
  if (fb == layers.end()) missing += " " + second;
  if (!missing.empty()) {
    throw Error(ErrorKind::kLookup,
                "signal '" + signal + "' needs missing band(s):" + missing);
  }
  for (std::size_t i = 0; i < fa->second.grids.size(); ++i) {
    const std::string& ts = fa->second.labels[i]->timestamp;
    for (std::size_t j = 0; j < fb->second.grids.size(); ++j) {
      if (fb->second.labels[j]->timestamp != ts) continue;
      if (*kind == IndexKind::kVVH) {
        out.add({signal, ts}, vvh_index(*fa->second.grids[i], *fb->second.grids[j], gamma));
      } else {
        out.add({signal, ts},
                normalized_difference(*fa->second.grids[i], *fb->second.grids[j]));
      }
      break;
    }
  }
  if (out.size() == 0) {
    throw Error(ErrorKind::kLookup, "signal '" + signal + "': bands " + first + " and " +
                                        second + " share no acquisition date");
  }
  return out;
}

namespace {

struct Moments {
  double mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

Moments central_moments(std::span<const double> v) {
  Moments m;
  const auto n = static_cast<double>(v.size());
  for (double x : v) m.mean += x;
  m.mean /= n;
  for (double x : v) {
    const double d = x - m.mean;
    const double d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

// `sorted` must be ascending; `m` its central moments.
std::optional<double> stat_of_sorted(std::span<const double> sorted, const Moments& m,
                                     StatKind stat) {
  const std::size_t n = sorted.size();
  if (n == 0) return std::nullopt;
  switch (stat) {
    case StatKind::kMin: return sorted.front();
    case StatKind::kMax: return sorted.back();
    case StatKind::kMean: return m.mean;
    case StatKind::kMedian: return percentile_sorted(sorted, 50.0);
    case StatKind::kStdDev: return std::sqrt(m.m2);
    case StatKind::kSkewness:
      if (n < 3 || m.m2 < kEpsVar) return std::nullopt;
      return m.m3 / std::pow(m.m2, 1.5);
    case StatKind::kKurtosis:
      if (n < 3 || m.m2 < kEpsVar) return std::nullopt;
      return m.m4 / (m.m2 * m.m2) - 3.0;
    case StatKind::kP10: return percentile_sorted(sorted, 10.0);
    case StatKind::kP25: return percentile_sorted(sorted, 25.0);
    case StatKind::kP75: return percentile_sorted(sorted, 75.0);
    case StatKind::kP90: return percentile_sorted(sorted, 90.0);
    case StatKind::kInterquartileRange:
      return percentile_sorted(sorted, 75.0) - percentile_sorted(sorted, 25.0);
  }
  return std::nullopt;
}

}  // namespace

std::optional<double> series_stat(std::span<double> values, StatKind stat) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const Moments m = central_moments(values);
  return stat_of_sorted(values, m, stat);
}

std::vector<RasterGrid> temporal_stats(const RasterStack& stack, const std::string& signal,
                                       std::span<const StatKind> stats) {
  const auto idx = stack.layer_indices(signal);
  if (idx.empty()) {
    throw Error(ErrorKind::kLookup, "signal '" + signal + "' not found in stack");
  }
  const GridGeometry& g = stack.geometry();
  const float nodata = stack.layers()[idx.front()].nodata();
  std::vector<RasterGrid> out;
  for (std::size_t s = 0; s < stats.size(); ++s) out.emplace_back(g, nodata);
  std::vector<double> series;
  series.reserve(idx.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    series.clear();
    for (std::size_t i : idx) {
      const RasterGrid& layer = stack.layers()[i];
      const float v = layer.values()[p];
      if (!layer.is_nodata(v)) series.push_back(v);
    }
    if (series.empty()) continue;
    std::sort(series.begin(), series.end());
    const Moments m = central_moments(series);
    for (std::size_t s = 0; s < stats.size(); ++s) {
      if (auto v = stat_of_sorted(series, m, stats[s]); v && std::isfinite(*v)) {
        out[s].values()[p] = static_cast<float>(*v);
      }
    }
  }
  return out;
}

RasterGrid temporal_stat(const RasterStack& stack, const std::string& signal,
                         StatKind stat) {
  const StatKind one[] = {stat};
  return std::move(temporal_stats(stack, signal, one).front());
}

void FeatureRasters::add(std::string name, RasterGrid grid) {
  if (find(name)) throw Error(ErrorKind::kRecipe, "duplicate feature " + name);
  if (!grids_.empty()) {
    require_aligned(grids_.front().geometry(), grid.geometry(), name.c_str());
  }
  names_.push_back(std::move(name));
  grids_.push_back(std::move(grid));
}

const RasterGrid* FeatureRasters::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return &grids_[i];
  }
  return nullptr;
}

const RasterGrid& FeatureRasters::at(std::string_view name) const {
  if (const RasterGrid* g = find(name)) return *g;
  throw Error(ErrorKind::kLookup, "feature '" + std::string(name) + "' not available");
}

RasterGrid burn_geometry_feature(std::string_view name, const FootprintSet& footprints,
                                 const GridGeometry& geometry) {
  if (!is_geometry_feature(name)) {
    throw Error(ErrorKind::kRecipe, "unknown geometry feature " + std::string(name));
  }
  std::vector<std::optional<double>> values(footprints.size());
  if (name == "Near_Distance") {
    values = near_distances(footprints);
  } else {
    for (std::size_t i = 0; i < footprints.size(); ++i) {
      const MinBoundingGeometry mbg = min_bounding_rect(footprints[i].polygon);
      values[i] = name == "MBG_Width"    ? mbg.width_m
                  : name == "MBG_Length" ? mbg.length_m
                                         : mbg.orientation_deg;
    }
  }
  RasterGrid out(geometry);
  MaskGrid burned(geometry);
  for (std::size_t i = 0; i < footprints.size(); ++i) {
    if (!values[i]) continue;
    const MaskGrid mask = rasterize(footprints[i].polygon, geometry);
    for (std::size_t p : mask.set_indices()) {
      if (burned.test(p)) continue;  // first footprint wins on overlap
      burned.set(p);
      out.values()[p] = static_cast<float>(*values[i]);
    }
  }
  // Remaining pixels take the value of the nearest footprint pixel.
  const auto nearest = nearest_set_pixel(burned);
  auto vals = out.values();
  for (std::size_t p = 0; p < vals.size(); ++p) {
    if (!burned.test(p) && nearest[p] >= 0) vals[p] = vals[static_cast<std::size_t>(nearest[p])];
  }
  return out;
}

FeatureRasters build_feature_rasters(std::span<const RasterStack> stacks,
                                     const FeatureRecipe& recipe,
                                     const FootprintSet* footprints) {
  recipe.validate();
  FeatureRasters out;
  if (recipe.entries.empty() && recipe.geometry_features.empty()) return out;
  for (std::size_t i = 1; i < stacks.size(); ++i) {
    require_aligned(stacks[0].geometry(), stacks[i].geometry(), "raster stacks");
  }

  // Group statistics per signal so each series is reduced in one pass.
  std::vector<std::string> signals;
  std::map<std::string, std::vector<StatKind>> stats_of;
  for (const auto& e : recipe.entries) {
    if (!stats_of.count(e.signal)) signals.push_back(e.signal);
    stats_of[e.signal].push_back(e.stat);
  }

  std::vector<std::string> failures;
  std::map<std::string, RasterGrid> built;
  for (const std::string& signal : signals) {
    try {
      const RasterStack series = signal_series(stacks, signal, recipe.bands, recipe.gamma);
      const auto& stats = stats_of[signal];
      auto grids = temporal_stats(series, signal, stats);
      for (std::size_t s = 0; s < stats.size(); ++s) {
        built.emplace(RecipeEntry{signal, stats[s]}.name(), std::move(grids[s]));
      }
    } catch (const Error& e) {
      failures.push_back(e.what());
    }
  }
  if (!recipe.geometry_features.empty() && !footprints) {
    failures.push_back("geometry features requested but no footprints given");
  }
  if (!failures.empty()) {
    std::string msg = "unresolvable recipe entries:";
    for (const auto& f : failures) msg += "\n  " + f;
    throw Error(ErrorKind::kRecipe, msg);
  }
  for (const auto& e : recipe.entries) {
    auto node = built.extract(e.name());
    out.add(e.name(), std::move(node.mapped()));
  }
  if (!recipe.geometry_features.empty()) {
    const GridGeometry& g = stacks.empty() ? GridGeometry{} : stacks[0].geometry();
    for (const auto& name : recipe.geometry_features) {
      out.add(name, burn_geometry_feature(name, *footprints, g));
    }
  }
  return out;
}

using nlohmann::json;

void write_feature_dir(const FeatureRasters& features, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json names = json::array();
  for (std::size_t i = 0; i < features.size(); ++i) {
    write_raster(features.grids()[i], dir / (features.names()[i] + ".bhgr"));
    names.push_back(features.names()[i]);
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error(ErrorKind::kIo, "cannot write manifest in " + dir.string());
  out << json{{"format", "bhfeatures/1"}, {"features", names}}.dump(1) << '\n';
}

std::vector<std::string> read_feature_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error(ErrorKind::kIo, "no manifest.json in " + dir.string());
  json doc;
  try {
    doc = json::parse(in);
    return doc.at("features").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, "bad feature manifest: " + std::string(e.what()));
  }
}

FeatureRasters read_feature_dir(const std::filesystem::path& dir,
                                std::span<const std::string> subset) {
  const auto names = read_feature_manifest(dir);
  FeatureRasters out;
  if (subset.empty()) {
    for (const auto& n : names) out.add(n, read_raster(dir / (n + ".bhgr")));
    return out;
  }
  std::string missing;
  for (const auto& n : subset) {
    if (std::find(names.begin(), names.end(), n) == names.end()) missing += " " + n;
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::kLookup, "features missing from " + dir.string() + ":" + missing);
  }
  for (const auto& n : subset) out.add(n, read_raster(dir / (n + ".bhgr")));
  return out;
}

RasterStack read_stack(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorKind::kIo, "cannot open stack manifest " + manifest.string());
  RasterStack stack;
  try {
    const json doc = json::parse(in);
    for (const json& layer : doc.at("layers")) {
      const auto path = manifest.parent_path() / layer.at("path").get<std::string>();
      stack.add({layer.at("band").get<std::string>(), layer.at("timestamp").get<std::string>()},
                read_raster(path));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, manifest.string() + ": " + e.what());
  }
  if (stack.size() == 0) throw Error(ErrorKind::kData, "stack manifest lists no layers");
  return stack;
}

void write_stack(const RasterStack& stack, const std::filesystem::path& dir,
                 const std::string& manifest_name) {
  std::filesystem::create_directories(dir);
  json layers = json::array();
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const auto& label = stack.labels()[i];
    std::ostringstream name;
    name << label.band << "_" << label.timestamp << ".bhgr";
    write_raster(stack.layers()[i], dir / name.str());
    layers.push_back({{"band", label.band}, {"timestamp", label.timestamp}, {"path", name.str()}});
  }
  std::ofstream out(dir / manifest_name);
  if (!out) throw Error(ErrorKind::kIo, "cannot write stack manifest");
  out << json{{"format", "bhstack/1"}, {"layers", layers}}.dump(1) << '\n';
}

}  // namespace bh
