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

#include "bh/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "bh/error.hpp"
#include "bh/geometry.hpp"
#include "bh/rng.hpp"
#include "bh/stats.hpp"

namespace bh {

const char* to_string(DropReason reason) {
  switch (reason) {
    case DropReason::kSubPixelFootprint: return "sub-pixel footprint";
    case DropReason::kNoCoverage: return "no reference height coverage";
    case DropReason::kNoTarget: return "no reference height";
    case DropReason::kMissingFeature: return "missing feature value";
    case DropReason::kNoNeighbor: return "no neighbor for near distance";
  }
  return "dropped";
}

std::optional<double> zonal_median(const RasterGrid& grid, std::span<const std::size_t> pixels) {
  std::vector<float> vals;
  vals.reserve(pixels.size());
  const auto v = grid.values();
  for (std::size_t p : pixels) {
    if (!grid.is_nodata(v[p])) vals.push_back(v[p]);
  }
  return median_inplace(std::span<float>(vals));
}

std::optional<double> zonal_median(const RasterGrid& grid, const MaskGrid& mask) {
  require_aligned(grid.geometry(), mask.geometry(), "zonal median");
  const auto idx = mask.set_indices();
  return zonal_median(grid, idx);
}

HeightOutcome reference_height(const RasterGrid& ndsm, const Footprint& footprint) {
  const MaskGrid mask = rasterize(footprint.polygon, ndsm.geometry());
  const auto idx = mask.set_indices();
  if (idx.empty()) return {std::nullopt, DropReason::kSubPixelFootprint};
  auto h = zonal_median(ndsm, idx);
  if (!h) return {std::nullopt, DropReason::kNoCoverage};
  return {h, DropReason::kNoCoverage};
}

std::vector<std::size_t> zone_pixels(const Footprint& footprint, const GridGeometry& geometry,
                                     double buffer_m) {
  return buffer_mask(rasterize(footprint.polygon, geometry), buffer_m).set_indices();
}

FeatureTable assemble_samples(const FeatureRasters& features, const FootprintSet& footprints,
                              const AssemblyOptions& options, AssemblyReport* report) {
  if (!(options.buffer_m >= 0.0)) {
    throw Error(ErrorKind::kParameter, "buffer distance must be non-negative");
  }
  if (features.empty()) throw Error(ErrorKind::kData, "no feature rasters to sample");
  const GridGeometry& geom = features.grids().front().geometry();
  if (options.ndsm) require_aligned(geom, options.ndsm->geometry(), "reference heights");

  std::vector<std::string> columns(features.names().begin(), features.names().end());
  columns.push_back(kHeightColumn);
  FeatureTable table(columns, std::string(kHeightColumn));

  bool wants_shape = false;
  bool wants_near = false;
  for (const auto& n : features.names()) {
    wants_shape |= is_geometry_feature(n) && n != "Near_Distance";
    wants_near |= n == "Near_Distance";
  }
  std::vector<std::optional<double>> near;
  if (wants_near) near = near_distances(footprints);

  AssemblyReport local;
  AssemblyReport& rep = report ? *report : local;
  rep = {};
  std::vector<double> row(columns.size());
  for (std::size_t i = 0; i < footprints.size(); ++i) {
    const Footprint& fp = footprints[i];
    const MaskGrid own = rasterize(fp.polygon, geom);
    const auto own_idx = own.set_indices();
    if (own_idx.empty()) {
      rep.dropped.push_back({fp.id, DropReason::kSubPixelFootprint, ""});
      continue;
    }
    double target;
    if (options.ndsm) {
      auto h = zonal_median(*options.ndsm, own_idx);
      if (!h) {
        rep.dropped.push_back({fp.id, DropReason::kNoCoverage, ""});
        continue;
      }
      target = *h;
    } else if (fp.ref_height_m) {
      target = *fp.ref_height_m;
    } else {
      rep.dropped.push_back({fp.id, DropReason::kNoTarget, ""});
      continue;
    }

    const auto zone = buffer_mask(own, options.buffer_m).set_indices();
    std::optional<MinBoundingGeometry> mbg;
    if (wants_shape) mbg = min_bounding_rect(fp.polygon);

    bool ok = true;
    for (std::size_t f = 0; f < features.size() && ok; ++f) {
      const std::string& name = features.names()[f];
      std::optional<double> v;
      if (name == "MBG_Width") {
        v = mbg->width_m;
      } else if (name == "MBG_Length") {
        v = mbg->length_m;
      } else if (name == "MBG_Orientation") {
        v = mbg->orientation_deg;
      } else if (name == "Near_Distance") {
        v = near[i];
        if (!v) {
          rep.dropped.push_back({fp.id, DropReason::kNoNeighbor, name});
          ok = false;
          break;
        }
      } else {
        v = zonal_median(features.grids()[f], zone);
      }
      if (!v) {
        rep.dropped.push_back({fp.id, DropReason::kMissingFeature, name});
        ok = false;
        break;
      }
      row[f] = *v;
    }
    if (!ok) continue;
    row.back() = target;
    table.add_row(fp.id, row);
  }
  rep.kept = table.rows();
  return table;
}

FeatureTable clip_target(const FeatureTable& table, double lo_pct, double hi_pct) {
  if (!(lo_pct >= 0.0 && lo_pct < hi_pct && hi_pct <= 100.0)) {
    throw Error(ErrorKind::kParameter, "percentile clip requires 0 <= lo < hi <= 100");
  }
  if (table.rows() == 0) throw Error(ErrorKind::kData, "cannot clip an empty table");
  const auto t = table.target_values();
  std::vector<double> sorted = t;
  std::sort(sorted.begin(), sorted.end());
  const double p_lo = percentile_sorted(std::span<const double>(sorted), lo_pct);
  const double p_hi = percentile_sorted(std::span<const double>(sorted), hi_pct);
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < t.size(); ++r) {
    if (t[r] >= p_lo && t[r] <= p_hi) keep.push_back(r);
  }
  return table.select_rows(keep);
}

FeatureTable log_transform_target(const FeatureTable& table) {
  const std::size_t ti = table.target_index();
  FeatureTable out(std::vector<std::string>(table.columns().begin(), table.columns().end()),
                   table.target());
  std::vector<double> row(table.cols());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto src = table.row(r);
    std::copy(src.begin(), src.end(), row.begin());
    row[ti] = std::log(std::max(row[ti], 1.0));
    out.add_row(table.ids()[r], row);
  }
  if (*table.target() == kLogHeightColumn) return out;
  return out.rename_column(*table.target(), kLogHeightColumn);
}

BinnedTable bin_by_target(const FeatureTable& table, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::kParameter, "bin step must be positive");
  if (table.rows() == 0) throw Error(ErrorKind::kData, "cannot bin an empty table");
  const std::size_t ti = table.target_index();
  std::map<long, std::vector<std::size_t>> bins;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const double t = table.value(r, ti);
    auto k = static_cast<long>(std::floor(t / step));
    // Keep k*step <= t < (k+1)*step exact in floating point.
    while (static_cast<double>(k + 1) * step <= t) ++k;
    while (static_cast<double>(k) * step > t) --k;
    bins[k].push_back(r);
  }
  BinnedTable out;
  out.step = step;
  out.start = 0.0;
  out.table = FeatureTable(std::vector<std::string>(table.columns().begin(), table.columns().end()),
                           table.target());
  std::vector<double> row(table.cols());
  std::vector<double> buf;
  for (const auto& [k, members] : bins) {
    for (std::size_t c = 0; c < table.cols(); ++c) {
      buf.clear();
      for (std::size_t r : members) buf.push_back(table.value(r, c));
      row[c] = *median_inplace(std::span<double>(buf));
    }
    out.table.add_row("bin_" + std::to_string(k), row);
    out.bin_index.push_back(k);
    out.source_count.push_back(members.size());
  }
  out.count = static_cast<std::size_t>(bins.rbegin()->first - bins.begin()->first + 1);
  return out;
}

BinnedTable prepare_training(const FeatureTable& table, double lo_pct, double hi_pct,
                             double bin_step) {
  if (table.rows() == 0) throw Error(ErrorKind::kData, "empty training table");
  return bin_by_target(log_transform_target(clip_target(table, lo_pct, hi_pct)), bin_step);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::kParameter, "test fraction must be in (0, 1)");
  }
  if (n < 2) throw Error(ErrorKind::kData, "need at least 2 rows to split");
  auto n_test = static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  Rng rng(seed);
  auto perm = permutation(n, rng);
  std::vector<std::size_t> test(perm.begin(), perm.begin() + static_cast<long>(n_test));
  std::vector<std::size_t> train(perm.begin() + static_cast<long>(n_test), perm.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {std::move(train), std::move(test)};
}

std::pair<FeatureTable, FeatureTable> split(const FeatureTable& table, double test_fraction,
                                            std::uint64_t seed) {
  auto [train, test] = split_indices(table.rows(), test_fraction, seed);
  return {table.select_rows(train), table.select_rows(test)};
}

}  // namespace bh
