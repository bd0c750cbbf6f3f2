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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "bh/error.hpp"
#include "bh/geometry.hpp"
#include "bh/rng.hpp"
#include "bh/spectral.hpp"
#include "bh/stats.hpp"
#include "bh/synth.hpp"

namespace bh {

namespace {

constexpr double kMaxHeight = 550.0;
constexpr double kMinSide = 15.0;  // guarantees at least one pixel center at 10 m

struct BandSpec {
  const char* name;
  double base;
  double amp;
  double center;  // response curve midpoint in ln(height)
  double width;
  bool informative;
  bool radar;
};

constexpr BandSpec kBands[] = {
    {"B3", 0.08, 0.04, 0.0, 1.0, false, false},  {"B4", 0.07, 0.04, 0.0, 1.0, false, false},
    {"B5", 0.10, 0.05, 2.0, 0.8, true, false},   {"B6", 0.15, 0.06, 2.5, 1.0, true, false},
    {"B8", 0.25, 0.08, 3.0, 1.0, true, false},   {"B11", 0.20, 0.05, 0.0, 1.0, false, false},
    {"VV", 0.15, 0.12, 3.0, 0.9, true, true},    {"VH", 0.04, 0.03, 2.5, 1.1, true, true},
};

double response(const BandSpec& b, double lh) {
  return 1.0 / (1.0 + std::exp(-(lh - b.center) / b.width));
}

std::vector<double> blur(const std::vector<double>& in, std::size_t rows, std::size_t cols,
                         double sigma) {
  if (!(sigma > 0.0)) return in;
  const auto radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (long i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (auto& v : k) v /= total;
  const auto R = static_cast<long>(rows);
  const auto C = static_cast<long>(cols);
  std::vector<double> tmp(in.size(), 0.0), out(in.size(), 0.0);
  for (long r = 0; r < R; ++r) {
    for (long c = 0; c < C; ++c) {
      double s = 0.0;
      for (long i = -radius; i <= radius; ++i) {
        const long cc = c + i;
        if (cc >= 0 && cc < C) {
          s += k[static_cast<std::size_t>(i + radius)] * in[static_cast<std::size_t>(r * C + cc)];
        }
      }
      tmp[static_cast<std::size_t>(r * C + c)] = s;
    }
  }
  for (long r = 0; r < R; ++r) {
    for (long c = 0; c < C; ++c) {
      double s = 0.0;
      for (long i = -radius; i <= radius; ++i) {
        const long rr = r + i;
        if (rr >= 0 && rr < R) {
          s += k[static_cast<std::size_t>(i + radius)] * tmp[static_cast<std::size_t>(rr * C + c)];
        }
      }
      out[static_cast<std::size_t>(r * C + c)] = s;
    }
  }
  return out;
}

Polygon rectangle(Point center, double width, double length, double angle_rad) {
  const double ca = std::cos(angle_rad), sa = std::sin(angle_rad);
  const double hw = width / 2.0, hl = length / 2.0;
  const Point local[4] = {{-hl, -hw}, {hl, -hw}, {hl, hw}, {-hl, hw}};
  Polygon p;
  for (const auto& q : local) {
    p.exterior.push_back({center.x + q.x * ca - q.y * sa, center.y + q.x * sa + q.y * ca});
  }
  return p;
}

bool boxes_near(const BoundingBox& a, const BoundingBox& b, double gap) {
  return a.min_x - gap <= b.max_x && b.min_x - gap <= a.max_x && a.min_y - gap <= b.max_y &&
         b.min_y - gap <= a.max_y;
}

}  // namespace

SynthCity synth_generate(const SynthOptions& o) {
  if (o.size < 64) throw Error(ErrorKind::kParameter, "synthetic city needs size >= 64 px");
  if (o.n_buildings < 10) throw Error(ErrorKind::kParameter, "synthetic city needs >= 10 buildings");
  if (o.n_dates < 1 || o.n_dates > 12) {
    throw Error(ErrorKind::kParameter, "n_dates must lie in [1, 12]");
  }
  if (!(o.pixel_size > 0.0)) throw Error(ErrorKind::kParameter, "pixel_size must be positive");

  const double extent = static_cast<double>(o.size) * o.pixel_size;
  GridGeometry g{o.size, o.size, 0.0, extent, o.pixel_size};
  SynthCity city;

  // Downtown cores drive both density and height.
  Rng layout(named_seed(o.seed, "layout"));
  std::vector<Point> cores;
  for (std::size_t i = 0; i < std::max<std::size_t>(o.n_cores, 1); ++i) {
    cores.push_back({uniform(layout, 0.2 * extent, 0.8 * extent),
                     uniform(layout, 0.2 * extent, 0.8 * extent)});
  }
  const double core_sigma = 0.15 * extent;
  auto urban = [&](Point p) {
    double u = 0.0;
    for (const auto& c : cores) {
      const double d2 = (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y);
      u = std::max(u, std::exp(-0.5 * d2 / (core_sigma * core_sigma)));
    }
    return u;
  };

  std::vector<double> lheight;
  std::vector<BoundingBox> boxes;
  const double gap = o.pixel_size;
  const std::size_t max_attempts = 400 * o.n_buildings;
  std::size_t attempts = 0;
  while (city.footprints.size() < o.n_buildings) {
    if (++attempts > max_attempts) {
      throw Error(ErrorKind::kData, "could not pack " + std::to_string(o.n_buildings) +
                                        " buildings after " + std::to_string(max_attempts) +
                                        " attempts");
    }
    Point c;
    if (uniform01(layout) < 0.7) {
      const auto& core = cores[uniform_index(layout, cores.size())];
      c = {core.x + 1.2 * core_sigma * normal(layout), core.y + 1.2 * core_sigma * normal(layout)};
    } else {
      c = {uniform(layout, 0.0, extent), uniform(layout, 0.0, extent)};
    }
    const double u = urban(c);
    const double lh =
        std::clamp(1.6 + 2.4 * u + 0.55 * normal(layout), 0.0, std::log(kMaxHeight));
    const double side = std::clamp(std::exp(2.7 + 0.22 * lh + 0.25 * normal(layout)), kMinSide,
                                   150.0);
    const double aspect = uniform(layout, 1.0, 2.2);
    const double angle = uniform(layout, 0.0, 3.141592653589793);
    const double width = std::max(kMinSide, side / std::sqrt(aspect));
    const double length = side * std::sqrt(aspect);
    Polygon poly = rectangle(c, width, length, angle);
    const BoundingBox box = bounding_box(poly.exterior);
    const double margin = 2.0 * o.pixel_size;
    if (box.min_x < margin || box.min_y < margin || box.max_x > extent - margin ||
        box.max_y > extent - margin) {
      continue;
    }
    bool clash = false;
    for (std::size_t i = 0; i < boxes.size() && !clash; ++i) {
      if (!boxes_near(box, boxes[i], gap)) continue;
      const Polygon& other = city.footprints[i].polygon;
      clash = boundary_distance(poly, other) < gap || contains(other, poly.exterior[0]) ||
              contains(poly, other.exterior[0]);
    }
    if (clash) continue;
    char id[32];
    std::snprintf(id, sizeof id, "b%05zu", city.footprints.size());
    city.footprints.push_back(Footprint{id, std::move(poly), std::nullopt});
    boxes.push_back(box);
    lheight.push_back(lh);
  }

  // Per-building pixels and halo rings.
  const std::size_t npx = g.size();
  std::vector<long> owner(npx, -1);
  std::vector<std::vector<std::size_t>> pixels(city.footprints.size());
  for (std::size_t b = 0; b < city.footprints.size(); ++b) {
    for (auto p : rasterize(city.footprints[b].polygon, g).set_indices()) {
      if (owner[p] < 0) {
        owner[p] = static_cast<long>(b);
        pixels[b].push_back(p);
      }
    }
  }

  // Signal fields in response units.
  Rng noise_rng(named_seed(o.seed, "noise"));
  std::vector<std::string> dates;
  for (std::size_t d = 0; d < o.n_dates; ++d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "2023-%02zu-15", d + 1);
    dates.emplace_back(buf);
  }
  // Locally weighted height surface: nearby roofs vote with their ln(height),
  // open ground pulls the surface towards zero.
  std::vector<double> occ(npx, 0.0), occ_h(npx, 0.0);
  for (std::size_t b = 0; b < pixels.size(); ++b) {
    for (auto p : pixels[b]) {
      occ[p] = 1.0;
      occ_h[p] = lheight[b];
    }
  }
  const auto w = blur(occ, g.rows, g.cols, o.spread_px);
  const auto wh = blur(occ_h, g.rows, g.cols, o.spread_px);
  std::vector<double> surface(npx);
  for (std::size_t p = 0; p < npx; ++p) surface[p] = wh[p] / (w[p] + o.ground_weight);

  city.optical = RasterStack(g);
  city.sar = RasterStack(g);
  std::vector<std::vector<double>> band_mean;  // temporal mean per informative band
  for (const auto& band : kBands) {
    std::vector<double> field(npx, 0.0);
    if (band.informative) {
      const double roof_gain = band.radar && o.halo ? o.radar_roof_gain : 1.0;
      for (std::size_t p = 0; p < npx; ++p) {
        if (owner[p] >= 0) {
          const double own = lheight[static_cast<std::size_t>(owner[p])];
          const double lh = o.roof_own_weight * own + (1.0 - o.roof_own_weight) * surface[p];
          field[p] = roof_gain * response(band, lh);
        } else {
          field[p] = response(band, surface[p]);
        }
      }
      if (band.radar && o.halo) {
        for (std::size_t b = 0; b < pixels.size(); ++b) {
          const double h = std::exp(lheight[b]);
          if (h < 15.0) continue;
          const double w = std::clamp(std::floor(lheight[b] - 1.7), 1.0, 3.0) * o.pixel_size;
          const Polygon& poly = city.footprints[b].polygon;
          const BoundingBox box = bounding_box(poly.exterior);
          const auto c0 = static_cast<long>(std::floor((box.min_x - w) / o.pixel_size));
          const auto c1 = static_cast<long>(std::floor((box.max_x + w) / o.pixel_size));
          const auto r0 = static_cast<long>(std::floor((extent - box.max_y - w) / o.pixel_size));
          const auto r1 = static_cast<long>(std::floor((extent - box.min_y + w) / o.pixel_size));
          for (long r = std::max(0L, r0); r <= std::min<long>(r1, static_cast<long>(g.rows) - 1); ++r) {
            for (long c = std::max(0L, c0); c <= std::min<long>(c1, static_cast<long>(g.cols) - 1); ++c) {
              const auto p = static_cast<std::size_t>(r) * g.cols + static_cast<std::size_t>(c);
              if (owner[p] >= 0) continue;
              const Point q{g.center_x(static_cast<std::size_t>(c)),
                            g.center_y(static_cast<std::size_t>(r))};
              double d = 1e300;
              const auto& ring = poly.exterior;
              for (std::size_t i = 0; i < ring.size(); ++i) {
                d = std::min(d, point_segment_distance(q, ring[i], ring[(i + 1) % ring.size()]));
              }
              if (d > w) continue;
              field[p] += o.halo_gain * response(band, lheight[b]) * (1.0 - 0.5 * d / w);
            }
          }
        }
      }
    }
    std::vector<double> texture(npx);
    for (auto& t : texture) t = o.texture_noise * normal(noise_rng);
    std::vector<double> mean(npx, 0.0);
    RasterStack& stack = band.radar ? city.sar : city.optical;
    for (const auto& date : dates) {
      RasterGrid layer(g);
      auto vals = layer.values();
      for (std::size_t p = 0; p < npx; ++p) {
        const double s = field[p] + texture[p] + o.date_noise * normal(noise_rng);
        const double v = std::max(0.001, band.base + band.amp * s);
        vals[p] = static_cast<float>(v);
        mean[p] += static_cast<double>(vals[p]) / static_cast<double>(dates.size());
      }
      stack.add({band.name, date}, std::move(layer));
    }
    if (band.informative) band_mean.push_back(std::move(mean));
  }

  // Reference heights.
  Rng ref_rng(named_seed(o.seed, "reference"));
  city.ndsm = RasterGrid::filled(g, 0.0f);
  for (std::size_t b = 0; b < pixels.size(); ++b) {
    const double h = std::exp(lheight[b]);
    for (auto p : pixels[b]) {
      city.ndsm.values()[p] = static_cast<float>(std::max(0.0, h * (1.0 + 0.02 * normal(ref_rng))));
    }
  }

  // Quadrant regions.
  const double half = extent / 2.0;
  const char* names[4] = {"NW", "NE", "SW", "SE"};
  const Point mins[4] = {{0, half}, {half, half}, {0, 0}, {half, 0}};
  for (int i = 0; i < 4; ++i) {
    Polygon q;
    q.exterior = {{mins[i].x, mins[i].y},
                  {mins[i].x + half, mins[i].y},
                  {mins[i].x + half, mins[i].y + half},
                  {mins[i].x, mins[i].y + half}};
    city.regions.push_back(Footprint{names[i], std::move(q), std::nullopt});
  }

  std::vector<std::string> columns = {"height_m", "LHeight", "area_m2"};
  for (const char* s : kInformativeSignals) columns.push_back(std::string(s) + "_fp_mean");
  city.truth = FeatureTable(columns);
  std::vector<double> row(columns.size());
  std::vector<double> buf;
  for (std::size_t b = 0; b < pixels.size(); ++b) {
    row[0] = std::exp(lheight[b]);
    row[1] = lheight[b];
    row[2] = polygon_area(city.footprints[b].polygon);
    for (std::size_t k = 0; k < band_mean.size(); ++k) {
      buf.clear();
      for (auto p : pixels[b]) buf.push_back(band_mean[k][p]);
      row[3 + k] = *median_inplace<double>(buf);
    }
    city.truth.add_row(city.footprints[b].id, row);
  }
  return city;
}

void write_synth(const SynthCity& city, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_stack(city.optical, dir / "optical");
  write_stack(city.sar, dir / "sar");
  write_footprints(city.footprints, dir / "footprints.geojson");
  write_raster(city.ndsm, dir / "ndsm.bhgr");
  write_footprints(city.regions, dir / "regions.geojson");
  write_csv(city.truth, dir / "truth.csv");
}

FeatureTable friedman_table(std::size_t n, std::uint64_t seed, double noise) {
  if (n == 0) throw Error(ErrorKind::kParameter, "friedman_table: n must be positive");
  std::vector<std::string> cols;
  for (int j = 1; j <= 10; ++j) cols.push_back("x" + std::to_string(j));
  cols.push_back("y");
  FeatureTable table(cols, std::string("y"));
  Rng rng(seed);
  std::array<double, 11> row{};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 10; ++j) row[j] = uniform01(rng);
    row[10] = 10.0 * std::sin(std::numbers::pi * row[0] * row[1]) +
              20.0 * (row[2] - 0.5) * (row[2] - 0.5) + 10.0 * row[3] + 5.0 * row[4] +
              noise * normal(rng);
    table.add_row(std::to_string(i), row);
  }
  return table;
}

}  // namespace bh
