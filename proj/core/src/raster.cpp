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

#include "bh/raster.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "bh/error.hpp"
#include "bh/stats.hpp"

namespace bh {

void GridGeometry::validate() const {
  if (rows < 1 || cols < 1) {
    throw Error(ErrorKind::kGeometry, "grid must have at least one row and column");
  }
  if (!(pixel_size > 0.0) || !std::isfinite(pixel_size)) {
    throw Error(ErrorKind::kGeometry, "pixel_size must be positive and finite");
  }
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) {
    throw Error(ErrorKind::kGeometry, "grid origin must be finite");
  }
}

void require_aligned(const GridGeometry& a, const GridGeometry& b,
                     const char* what) {
  if (!(a == b)) {
    std::ostringstream os;
    os << "misaligned grids (" << what << "): " << a.rows << "x" << a.cols
       << " vs " << b.rows << "x" << b.cols;
    throw Error(ErrorKind::kGeometry, os.str());
  }
}

RasterGrid::RasterGrid(const GridGeometry& geometry, float nodata)
    : geometry_(geometry), nodata_(nodata), values_(geometry.size(), nodata) {
  geometry_.validate();
}

RasterGrid::RasterGrid(const GridGeometry& geometry, float nodata,
                       std::vector<float> values)
    : geometry_(geometry), nodata_(nodata), values_(std::move(values)) {
  geometry_.validate();
  if (values_.size() != geometry_.size()) {
    throw Error(ErrorKind::kShape, "raster value count does not match rows*cols");
  }
}

RasterGrid RasterGrid::filled(const GridGeometry& geometry, float value,
                              float nodata) {
  return RasterGrid(geometry, nodata, std::vector<float>(geometry.size(), value));
}

std::size_t RasterGrid::count_valid() const {
  std::size_t n = 0;
  for (float v : values_) n += is_nodata(v) ? 0 : 1;
  return n;
}

void RasterGrid::validate() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const float v = values_[i];
    if (!is_nodata(v) && !std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite value at pixel " << i << " (row " << i / geometry_.cols
         << ", col " << i % geometry_.cols << ")";
      throw Error(ErrorKind::kValidation, os.str());
    }
  }
}

void RasterStack::add(LayerLabel label, RasterGrid layer) {
  if (layers_.empty() && geometry_.size() == 0) geometry_ = layer.geometry();
  require_aligned(geometry_, layer.geometry(), label.band.c_str());
  for (std::size_t i = labels_.size(); i-- > 0;) {
    if (labels_[i].band == label.band) {
      if (label.timestamp < labels_[i].timestamp) {
        throw Error(ErrorKind::kValidation,
                    "timestamps must be non-decreasing for band " + label.band);
      }
      break;
    }
  }
  labels_.push_back(std::move(label));
  layers_.push_back(std::move(layer));
}

bool RasterStack::has_band(const std::string& band) const {
  return std::any_of(labels_.begin(), labels_.end(),
                     [&](const LayerLabel& l) { return l.band == band; });
}

std::vector<std::size_t> RasterStack::layer_indices(const std::string& band) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].band == band) out.push_back(i);
  }
  return out;
}

std::vector<std::string> RasterStack::bands() const {
  std::vector<std::string> out;
  for (const auto& l : labels_) {
    if (std::find(out.begin(), out.end(), l.band) == out.end()) out.push_back(l.band);
  }
  return out;
}

std::size_t MaskGrid::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<std::size_t> MaskGrid::set_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out.push_back(i);
  }
  return out;
}

namespace {

// Crossing of the horizontal line y = py by edge a-b under the half-open
// rule; returns the x coordinate of the crossing in `x`.
inline bool edge_crossing(const Point& a, const Point& b, double py, double& x) {
  if ((a.y >= py) == (b.y >= py)) return false;
  x = (b.x - a.x) * (py - a.y) / (b.y - a.y) + a.x;
  return true;
}

template <class Fn>
void for_each_edge(const Polygon& polygon, Fn&& fn) {
  auto ring_edges = [&](const Ring& ring) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) fn(ring[i], ring[(i + 1) % n]);
  };
  ring_edges(polygon.exterior);
  for (const auto& hole : polygon.holes) ring_edges(hole);
}

}  // namespace

bool contains(const Polygon& polygon, Point p) {
  bool inside = false;
  for_each_edge(polygon, [&](const Point& a, const Point& b) {
    double x;
    if (edge_crossing(a, b, p.y, x) && p.x < x) inside = !inside;
  });
  return inside;
}

MaskGrid rasterize(const Polygon& polygon, const GridGeometry& geometry) {
  MaskGrid mask(geometry);
  if (polygon.exterior.empty()) return mask;
  const BoundingBox box = bounding_box(polygon.exterior);
  const double ps = geometry.pixel_size;

  // Candidate rows: centers in [min_y, max_y], padded by one row for rounding.
  const double r_lo = std::floor((geometry.origin_y - box.max_y) / ps - 0.5) - 1.0;
  const double r_hi = std::ceil((geometry.origin_y - box.min_y) / ps - 0.5) + 1.0;
  if (r_hi < 0.0 || r_lo >= static_cast<double>(geometry.rows)) return mask;
  const std::size_t row_begin = r_lo < 0.0 ? 0 : static_cast<std::size_t>(r_lo);
  const std::size_t row_end =
      std::min(geometry.rows, static_cast<std::size_t>(r_hi) + 1);

  std::vector<double> xs;
  for (std::size_t r = row_begin; r < row_end; ++r) {
    const double py = geometry.center_y(r);
    xs.clear();
    for_each_edge(polygon, [&](const Point& a, const Point& b) {
      double x;
      if (edge_crossing(a, b, py, x)) xs.push_back(x);
    });
    if (xs.size() < 2) continue;
    std::sort(xs.begin(), xs.end());
    // A center px is inside iff an odd number of crossings satisfy px < x,
    // i.e. xs[2k] <= px < xs[2k+1] for some k.
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const double x0 = xs[k];
      const double x1 = xs[k + 1];
      double c_guess = std::floor((x0 - geometry.origin_x) / ps - 0.5) - 1.0;
      if (c_guess >= static_cast<double>(geometry.cols)) break;
      std::size_t c = c_guess < 0.0 ? 0 : static_cast<std::size_t>(c_guess);
      while (c < geometry.cols && geometry.center_x(c) < x0) ++c;
      while (c < geometry.cols && geometry.center_x(c) < x1) {
        mask.set(r, c);
        ++c;
      }
    }
  }
  return mask;
}

std::size_t window_radius(double window_m, double pixel_size) {
  return static_cast<std::size_t>(std::floor((window_m / pixel_size) / 2.0));
}

RasterGrid window_median(const RasterGrid& grid, double window_m) {
  const GridGeometry& g = grid.geometry();
  if (!(window_m >= g.pixel_size)) {
    throw Error(ErrorKind::kParameter,
                "moving window must be at least one pixel wide");
  }
  const std::size_t r = window_radius(window_m, g.pixel_size);
  RasterGrid out(g, grid.nodata());
  const auto in = grid.values();
  auto dst = out.values();
  std::vector<float> buf;
  buf.reserve((2 * r + 1) * (2 * r + 1));
  for (std::size_t row = 0; row < g.rows; ++row) {
    const std::size_t r0 = row >= r ? row - r : 0;
    const std::size_t r1 = std::min(g.rows - 1, row + r);
    for (std::size_t col = 0; col < g.cols; ++col) {
      const std::size_t c0 = col >= r ? col - r : 0;
      const std::size_t c1 = std::min(g.cols - 1, col + r);
      buf.clear();
      for (std::size_t rr = r0; rr <= r1; ++rr) {
        const float* line = in.data() + rr * g.cols;
        for (std::size_t cc = c0; cc <= c1; ++cc) {
          if (!grid.is_nodata(line[cc])) buf.push_back(line[cc]);
        }
      }
      if (auto m = median_inplace(std::span<float>(buf))) {
        dst[row * g.cols + col] = static_cast<float>(*m);
      }
    }
  }
  return out;
}

MaskGrid buffer_mask(const MaskGrid& mask, double distance_m) {
  if (!(distance_m >= 0.0)) {
    throw Error(ErrorKind::kParameter, "buffer distance must be non-negative");
  }
  if (distance_m == 0.0) return mask;
  const GridGeometry& g = mask.geometry();
  const double ps = g.pixel_size;
  const double d2 = distance_m * distance_m;
  const auto reach = static_cast<long>(std::floor(distance_m / ps)) + 1;

  struct Offset {
    long dr, dc;
  };
  std::vector<Offset> offsets;
  for (long dr = -reach; dr <= reach; ++dr) {
    for (long dc = -reach; dc <= reach; ++dc) {
      const double y = static_cast<double>(dr) * ps;
      const double x = static_cast<double>(dc) * ps;
      if (y * y + x * x <= d2) offsets.push_back({dr, dc});
    }
  }

  MaskGrid out(g);
  const auto rows = static_cast<long>(g.rows);
  const auto cols = static_cast<long>(g.cols);
  for (std::size_t idx : mask.set_indices()) {
    const auto row = static_cast<long>(idx / g.cols);
    const auto col = static_cast<long>(idx % g.cols);
    for (const Offset& o : offsets) {
      const long rr = row + o.dr;
      const long cc = col + o.dc;
      if (rr < 0 || cc < 0 || rr >= rows || cc >= cols) continue;
      out.set(static_cast<std::size_t>(rr * cols + cc));
    }
  }
  return out;
}

std::vector<long> nearest_set_pixel(const MaskGrid& mask) {
  const GridGeometry& g = mask.geometry();
  const auto rows = static_cast<long>(g.rows);
  const auto cols = static_cast<long>(g.cols);
  std::vector<long> out(g.size(), -1);
  if (mask.count() == 0) return out;

  // Column pass: nearest set row within each column.
  constexpr long kNone = -1;
  std::vector<long> near_row(g.size(), kNone);
  for (long c = 0; c < cols; ++c) {
    long last = kNone;
    for (long r = 0; r < rows; ++r) {
      if (mask.test(static_cast<std::size_t>(r * cols + c))) last = r;
      near_row[static_cast<std::size_t>(r * cols + c)] = last;
    }
    last = kNone;
    for (long r = rows - 1; r >= 0; --r) {
      const auto i = static_cast<std::size_t>(r * cols + c);
      if (mask.test(i)) last = r;
      if (last != kNone && (near_row[i] == kNone || last - r < r - near_row[i])) {
        near_row[i] = last;
      }
    }
  }

  // Row pass: lower envelope of parabolas (c - q)^2 + f(q).
  std::vector<long> v(static_cast<std::size_t>(cols));
  std::vector<double> z(static_cast<std::size_t>(cols) + 1);
  std::vector<double> f(static_cast<std::size_t>(cols));
  for (long r = 0; r < rows; ++r) {
    long k = -1;
    for (long q = 0; q < cols; ++q) {
      const long nr = near_row[static_cast<std::size_t>(r * cols + q)];
      if (nr == kNone) continue;
      const auto dr = static_cast<double>(nr - r);
      f[static_cast<std::size_t>(q)] = dr * dr;
      const auto fq = f[static_cast<std::size_t>(q)];
      const auto qd = static_cast<double>(q);
      double s = 0.0;
      while (k >= 0) {
        const long p = v[static_cast<std::size_t>(k)];
        const auto pd = static_cast<double>(p);
        s = ((fq + qd * qd) - (f[static_cast<std::size_t>(p)] + pd * pd)) / (2.0 * (qd - pd));
        if (s <= z[static_cast<std::size_t>(k)]) {
          --k;
        } else {
          break;
        }
      }
      ++k;
      v[static_cast<std::size_t>(k)] = q;
      z[static_cast<std::size_t>(k)] = k == 0 ? -1e300 : s;
      z[static_cast<std::size_t>(k) + 1] = 1e300;
    }
    if (k < 0) continue;
    long j = 0;
    for (long c = 0; c < cols; ++c) {
      while (z[static_cast<std::size_t>(j) + 1] < static_cast<double>(c)) ++j;
      const long q = v[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(r * cols + c)] =
          near_row[static_cast<std::size_t>(r * cols + q)] * cols + q;
    }
  }
  return out;
}

MaskGrid percentile_clip_mask(const RasterGrid& grid, double lo_pct,
                              double hi_pct) {
  if (!(lo_pct >= 0.0 && lo_pct < hi_pct && hi_pct <= 100.0)) {
    throw Error(ErrorKind::kParameter,
                "percentile clip requires 0 <= lo < hi <= 100");
  }
  MaskGrid out(grid.geometry());
  std::vector<float> valid;
  valid.reserve(grid.size());
  for (float v : grid.values()) {
    if (!grid.is_nodata(v)) valid.push_back(v);
  }
  if (valid.empty()) return out;
  std::sort(valid.begin(), valid.end());
  const double p_lo = percentile_sorted(std::span<const float>(valid), lo_pct);
  const double p_hi = percentile_sorted(std::span<const float>(valid), hi_pct);
  const auto values = grid.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (grid.is_nodata(values[i])) continue;
    const double v = values[i];
    if (v >= p_lo && v <= p_hi) out.set(i);
  }
  return out;
}

}  // namespace bh
