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

#ifndef BH_RASTER_HPP_
#define BH_RASTER_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bh/polygon.hpp"

namespace bh {

inline constexpr float kDefaultNodata = -9999.0f;

// North-up grid of square pixels. Row 0 is the top (max y) row.
struct GridGeometry {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double origin_x = 0.0;  // left edge of column 0
  double origin_y = 0.0;  // top edge of row 0
  double pixel_size = 1.0;

  // Two geometries are aligned iff all five fields compare equal.
  bool operator==(const GridGeometry&) const = default;

  void validate() const;
  std::size_t size() const { return rows * cols; }
  double center_x(std::size_t col) const {
    return origin_x + (static_cast<double>(col) + 0.5) * pixel_size;
  }
  double center_y(std::size_t row) const {
    return origin_y - (static_cast<double>(row) + 0.5) * pixel_size;
  }
};

// Throws kGeometry with `what` in the message when the grids differ.
void require_aligned(const GridGeometry& a, const GridGeometry& b,
                     const char* what);

class RasterGrid {
 public:
  RasterGrid() = default;
  // Every pixel initialised to nodata.
  explicit RasterGrid(const GridGeometry& geometry,
                      float nodata = kDefaultNodata);
  RasterGrid(const GridGeometry& geometry, float nodata,
             std::vector<float> values);

  static RasterGrid filled(const GridGeometry& geometry, float value,
                           float nodata = kDefaultNodata);

  const GridGeometry& geometry() const { return geometry_; }
  float nodata() const { return nodata_; }
  std::size_t rows() const { return geometry_.rows; }
  std::size_t cols() const { return geometry_.cols; }
  std::size_t size() const { return values_.size(); }

  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }

  float at(std::size_t row, std::size_t col) const {
    return values_[row * geometry_.cols + col];
  }
  float& at(std::size_t row, std::size_t col) {
    return values_[row * geometry_.cols + col];
  }

  bool is_nodata(float v) const {
    return v == nodata_ || (std::isnan(nodata_) && std::isnan(v));
  }
  bool is_valid(std::size_t index) const { return !is_nodata(values_[index]); }
  std::size_t count_valid() const;

  // Throws kValidation if any value is neither finite nor nodata.
  void validate() const;

 private:
  GridGeometry geometry_;
  float nodata_ = kDefaultNodata;
  std::vector<float> values_;
};

struct LayerLabel {
  std::string band;
  std::string timestamp;  // ISO-8601 date; compared lexicographically

  bool operator==(const LayerLabel&) const = default;
};

class RasterStack {
 public:
  RasterStack() = default;
  explicit RasterStack(const GridGeometry& geometry) : geometry_(geometry) {}

  // Appends a layer; throws kGeometry on misalignment and kValidation when
  // the timestamp goes backwards for the band.
  void add(LayerLabel label, RasterGrid layer);

  const GridGeometry& geometry() const { return geometry_; }
  std::span<const LayerLabel> labels() const { return labels_; }
  std::span<const RasterGrid> layers() const { return layers_; }
  std::size_t size() const { return layers_.size(); }

  bool has_band(const std::string& band) const;
  // Indices of the band's layers in time order.
  std::vector<std::size_t> layer_indices(const std::string& band) const;
  // Band names in first-appearance order.
  std::vector<std::string> bands() const;

 private:
  GridGeometry geometry_;
  std::vector<LayerLabel> labels_;
  std::vector<RasterGrid> layers_;
};

class MaskGrid {
 public:
  MaskGrid() = default;
  explicit MaskGrid(const GridGeometry& geometry)
      : geometry_(geometry), bits_(geometry.size(), 0) {}

  const GridGeometry& geometry() const { return geometry_; }
  std::size_t size() const { return bits_.size(); }
  bool test(std::size_t index) const { return bits_[index] != 0; }
  bool test(std::size_t row, std::size_t col) const {
    return bits_[row * geometry_.cols + col] != 0;
  }
  void set(std::size_t index, bool on = true) { bits_[index] = on ? 1 : 0; }
  void set(std::size_t row, std::size_t col, bool on = true) {
    set(row * geometry_.cols + col, on);
  }
  std::size_t count() const;
  std::vector<std::size_t> set_indices() const;

  bool operator==(const MaskGrid&) const = default;

 private:
  GridGeometry geometry_;
  std::vector<std::uint8_t> bits_;
};

// Pixel set iff its center is inside the polygon under the even-odd rule,
// holes included. Centers exactly on a top or left edge count as inside,
// on a bottom or right edge as outside.
MaskGrid rasterize(const Polygon& polygon, const GridGeometry& geometry);

// Same test for a single point; shares the crossing predicate with
// rasterize so that masks and point queries never disagree.
bool contains(const Polygon& polygon, Point p);

// Radius in pixels of the square moving window for a window edge length in
// meters: floor((window_m / pixel_size) / 2).
std::size_t window_radius(double window_m, double pixel_size);

// Median over the valid pixels of the (2r+1)x(2r+1) window clipped to the
// grid. Windows without valid pixels yield nodata. Throws kParameter when
// window_m < pixel_size.
RasterGrid window_median(const RasterGrid& grid, double window_m);

// Pixel set iff its center lies within distance_m of the center of any set
// input pixel. Center distances are taken on the lattice:
// (d_row * pixel)^2 + (d_col * pixel)^2 <= distance^2.
MaskGrid buffer_mask(const MaskGrid& mask, double distance_m);

// For every pixel, the index of the nearest set pixel by lattice Euclidean
// distance between centers (exact squared-distance transform); -1 for all
// pixels when the mask is empty.
std::vector<long> nearest_set_pixel(const MaskGrid& mask);

// Valid pixels with value inside [P_lo, P_hi].
MaskGrid percentile_clip_mask(const RasterGrid& grid, double lo_pct,
                              double hi_pct);

// --- BHGR v1 binary format ---------------------------------------------------

std::vector<std::uint8_t> encode_raster(const RasterGrid& grid);
RasterGrid decode_raster(std::span<const std::uint8_t> bytes);

RasterGrid read_raster(const std::filesystem::path& path);
void write_raster(const RasterGrid& grid, const std::filesystem::path& path);

// row,col,x,y,value text dump for external plotting; nodata rows skipped.
void dump_raster_csv(const RasterGrid& grid, const std::filesystem::path& path);

}  // namespace bh

#endif  // BH_RASTER_HPP_
