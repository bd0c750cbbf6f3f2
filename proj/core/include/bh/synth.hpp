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

#ifndef BH_SYNTH_HPP_
#define BH_SYNTH_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "bh/polygon.hpp"
#include "bh/raster.hpp"
#include "bh/table.hpp"

namespace bh {

// Signals whose temporal statistics carry building height.
inline constexpr std::array<const char*, 5> kInformativeSignals = {"B5", "B6", "B8", "VV", "VH"};

struct SynthOptions {
  std::uint64_t seed = 1;
  std::size_t size = 256;         // pixels per side
  std::size_t n_buildings = 700;
  double pixel_size = 10.0;
  std::size_t n_dates = 6;        // acquisitions per sensor, at most 12
  std::size_t n_cores = 3;        // downtown clusters
  double texture_noise = 0.3;     // per-pixel, constant through time (signal units)
  double date_noise = 0.2;        // per-pixel, per-date
  double spread_px = 2.5;         // bandwidth of the local height surface
  double ground_weight = 0.01;    // weight of open ground in the surface
  double roof_own_weight = 0.0;   // share of a roof's own height in its signal
  double radar_roof_gain = 0.35;  // radar response on roofs when halos are on
  bool halo = true;               // double-bounce brightening around tall buildings
  double halo_gain = 1.0;
};

struct SynthCity {
  RasterStack optical;  // B3 B4 B5 B6 B8 B11
  RasterStack sar;      // VV VH
  FootprintSet footprints;
  RasterGrid ndsm;
  FootprintSet regions;  // four quadrants
  // id, height_m, LHeight, area_m2, then the footprint median of each
  // informative signal's temporal mean.
  FeatureTable truth;
};

// Non-overlapping rotated rectangles with log-normal heights in [1, 550] m,
// clustered around downtown cores. Throws kData when the buildings cannot be
// packed.
SynthCity synth_generate(const SynthOptions& options);

// <dir>/optical/stack.json, <dir>/sar/stack.json, footprints.geojson,
// ndsm.bhgr, regions.geojson, truth.csv.
void write_synth(const SynthCity& city, const std::filesystem::path& dir);

// Friedman #1 regression table: x1..x10 ~ U(0, 1),
// y = 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5 + noise * N(0, 1).
// x6..x10 are pure noise. Target column "y".
FeatureTable friedman_table(std::size_t n, std::uint64_t seed, double noise = 1.0);

}  // namespace bh

#endif  // BH_SYNTH_HPP_
