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

#include "bh/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

#include "bh/error.hpp"
#include "bh/raster.hpp"

namespace bh {

namespace {

inline double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double dot(double ax, double ay, double bx, double by) {
  return ax * bx + ay * by;
}

double normalize_degrees(double deg) {
  double d = std::fmod(deg, 180.0);
  if (d < 0.0) d += 180.0;
  if (d >= 180.0) d -= 180.0;
  return d;
}

void validate_ring(const Ring& ring, const char* which) {
  if (ring.size() >= 2 && ring.front() == ring.back()) {
    throw Error(ErrorKind::kGeometry,
                std::string(which) + " ring must be stored open (first != last)");
  }
  std::set<std::pair<double, double>> distinct;
  for (const Point& p : ring) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorKind::kGeometry, std::string(which) + " ring has non-finite vertex");
    }
    distinct.emplace(p.x, p.y);
  }
  if (distinct.size() < 3) {
    throw Error(ErrorKind::kGeometry,
                std::string(which) + " ring needs at least 3 distinct vertices");
  }
}

}  // namespace

Ring open_ring(Ring ring) {
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  return ring;
}

double signed_area(const Ring& ring) {
  const std::size_t n = ring.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = ring[i];
    const Point& b = ring[(i + 1) % n];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * acc;
}

BoundingBox bounding_box(const Ring& ring) {
  BoundingBox box{std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  for (const Point& p : ring) {
    box.min_x = std::min(box.min_x, p.x);
    box.min_y = std::min(box.min_y, p.y);
    box.max_x = std::max(box.max_x, p.x);
    box.max_y = std::max(box.max_y, p.y);
  }
  return box;
}

void Polygon::validate() const {
  validate_ring(exterior, "exterior");
  for (const Ring& hole : holes) validate_ring(hole, "hole");
  if (signed_area(exterior) == 0.0) {
    throw Error(ErrorKind::kGeometry, "exterior ring has zero area");
  }
}

void validate(const FootprintSet& footprints) {
  std::unordered_set<std::string> ids;
  for (const Footprint& f : footprints) {
    if (f.id.empty()) throw Error(ErrorKind::kGeometry, "footprint with empty id");
    if (!ids.insert(f.id).second) {
      throw Error(ErrorKind::kGeometry, "duplicate footprint id '" + f.id + "'");
    }
    try {
      f.polygon.validate();
    } catch (const Error& e) {
      throw Error(e.kind(), "footprint '" + f.id + "': " + e.what());
    }
    if (f.ref_height_m && !(*f.ref_height_m > 0.0)) {
      throw Error(ErrorKind::kGeometry,
                  "footprint '" + f.id + "': ref_height_m must be positive");
    }
  }
}

Ring convex_hull(std::span<const Point> points) {
  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) {
    throw Error(ErrorKind::kDegenerate, "convex hull needs 3 distinct points");
  }
  Ring hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {  // lower chain
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {  // upper chain
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) {
    throw Error(ErrorKind::kDegenerate, "all points are collinear");
  }
  return hull;
}

MinBoundingGeometry min_bounding_rect_of_hull(const Ring& h) {
  const std::size_t n = h.size();
  if (n < 3) throw Error(ErrorKind::kDegenerate, "hull has fewer than 3 vertices");
  auto at = [&](std::size_t i) -> const Point& { return h[i % n]; };

  MinBoundingGeometry best;
  double best_area = std::numeric_limits<double>::infinity();
  // Caliper indices, kept as unbounded counters so they only move forward.
  std::size_t right = 1, top = 1, left = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = at(i);
    const Point b = at(i + 1);
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const double ux = (b.x - a.x) / len;
    const double uy = (b.y - a.y) / len;
    const double nx = -uy;  // inward normal for a CCW ring
    const double ny = ux;

    if (right < i + 1) right = i + 1;
    while (dot(at(right + 1).x - at(right).x, at(right + 1).y - at(right).y, ux, uy) > 0.0) ++right;
    if (top < right) top = right;
    while (dot(at(top + 1).x - at(top).x, at(top + 1).y - at(top).y, nx, ny) > 0.0) ++top;
    if (left < top) left = top;
    while (dot(at(left + 1).x - at(left).x, at(left + 1).y - at(left).y, ux, uy) < 0.0) ++left;

    const double along_max = dot(at(right).x - a.x, at(right).y - a.y, ux, uy);
    const double along_min = dot(at(left).x - a.x, at(left).y - a.y, ux, uy);
    const double span_u = along_max - along_min;
    const double span_n = dot(at(top).x - a.x, at(top).y - a.y, nx, ny);
    const double area = span_u * span_n;

    const double angle_u = std::atan2(uy, ux) * 180.0 / M_PI;
    MinBoundingGeometry cand;
    if (span_u > span_n) {
      cand = {span_n, span_u, normalize_degrees(angle_u)};
    } else if (span_n > span_u) {
      cand = {span_u, span_n, normalize_degrees(angle_u + 90.0)};
    } else {
      cand = {span_u, span_n,
              std::min(normalize_degrees(angle_u), normalize_degrees(angle_u + 90.0))};
    }
    const double tol = 1e-12 * std::max(area, best_area == std::numeric_limits<double>::infinity() ? area : best_area);
    if (area < best_area - tol ||
        (std::abs(area - best_area) <= tol && cand.orientation_deg < best.orientation_deg)) {
      best = cand;
      best_area = std::min(area, best_area);
    }
  }
  return best;
}

MinBoundingGeometry min_bounding_rect(const Polygon& polygon) {
  return min_bounding_rect_of_hull(convex_hull(polygon.exterior));
}

double polygon_area(const Polygon& polygon) {
  double area = std::abs(signed_area(polygon.exterior));
  for (const Ring& hole : polygon.holes) area -= std::abs(signed_area(hole));
  return area;
}

namespace {

// Returns (|A|, |A| * cx, |A| * cy) for one ring.
struct Moments {
  double area, mx, my;
};

Moments ring_moments(const Ring& ring) {
  const std::size_t n = ring.size();
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = ring[i];
    const Point& q = ring[(i + 1) % n];
    const double w = p.x * q.y - q.x * p.y;
    a2 += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  // Signed quantities share the orientation sign, so the ratio is the
  // centroid regardless of winding.
  const double area = 0.5 * a2;
  const double mx = cx / 6.0;
  const double my = cy / 6.0;
  const double s = area < 0.0 ? -1.0 : 1.0;
  return {s * area, s * mx, s * my};
}

}  // namespace

Point centroid(const Polygon& polygon) {
  Moments total = ring_moments(polygon.exterior);
  for (const Ring& hole : polygon.holes) {
    const Moments m = ring_moments(hole);
    total.area -= m.area;
    total.mx -= m.mx;
    total.my -= m.my;
  }
  return {total.mx / total.area, total.my / total.area};
}

double point_segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

namespace {

int orientation_sign(Point a, Point b, Point c) {
  const double v = cross(a, b, c);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(Point a, Point b, Point p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point a0, Point a1, Point b0, Point b1) {
  const int o1 = orientation_sign(a0, a1, b0);
  const int o2 = orientation_sign(a0, a1, b1);
  const int o3 = orientation_sign(b0, b1, a0);
  const int o4 = orientation_sign(b0, b1, a1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a0, a1, b0)) return true;
  if (o2 == 0 && on_segment(a0, a1, b1)) return true;
  if (o3 == 0 && on_segment(b0, b1, a0)) return true;
  if (o4 == 0 && on_segment(b0, b1, a1)) return true;
  return false;
}

double box_distance(const BoundingBox& a, const BoundingBox& b) {
  const double dx = std::max({0.0, a.min_x - b.max_x, b.min_x - a.max_x});
  const double dy = std::max({0.0, a.min_y - b.max_y, b.min_y - a.max_y});
  return std::hypot(dx, dy);
}

}  // namespace

double segment_distance(Point a0, Point a1, Point b0, Point b1) {
  if (segments_intersect(a0, a1, b0, b1)) return 0.0;
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

double boundary_distance(const Polygon& a, const Polygon& b) {
  const Ring& ra = a.exterior;
  const Ring& rb = b.exterior;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const Point& a0 = ra[i];
    const Point& a1 = ra[(i + 1) % ra.size()];
    for (std::size_t j = 0; j < rb.size(); ++j) {
      const double d = segment_distance(a0, a1, rb[j], rb[(j + 1) % rb.size()]);
      if (d < best) {
        best = d;
        if (best == 0.0) return 0.0;
      }
    }
  }
  // Disjoint boundaries: still overlapping if one exterior holds the other.
  if (contains(Polygon{ra, {}}, rb.front()) || contains(Polygon{rb, {}}, ra.front())) {
    return 0.0;
  }
  return best;
}

std::optional<double> near_distance(const Footprint& target,
                                    std::span<const Footprint> others) {
  std::optional<double> best;
  for (const Footprint& o : others) {
    if (&o == &target || o.id == target.id) continue;
    const double d = boundary_distance(target.polygon, o.polygon);
    if (!best || d < *best) best = d;
  }
  return best;
}

std::vector<std::optional<double>> near_distances(std::span<const Footprint> fps) {
  const std::size_t n = fps.size();
  std::vector<std::optional<double>> out(n);
  if (n < 2) return out;

  std::vector<BoundingBox> boxes(n);
  std::vector<double> diameters(n);
  BoundingBox world = bounding_box(fps[0].polygon.exterior);
  for (std::size_t i = 0; i < n; ++i) {
    boxes[i] = bounding_box(fps[i].polygon.exterior);
    diameters[i] = std::hypot(boxes[i].max_x - boxes[i].min_x, boxes[i].max_y - boxes[i].min_y);
    world.min_x = std::min(world.min_x, boxes[i].min_x);
    world.min_y = std::min(world.min_y, boxes[i].min_y);
    world.max_x = std::max(world.max_x, boxes[i].max_x);
    world.max_y = std::max(world.max_y, boxes[i].max_y);
  }
  std::vector<double> sorted_d = diameters;
  std::nth_element(sorted_d.begin(), sorted_d.begin() + n / 2, sorted_d.end());
  double cell = 2.0 * sorted_d[n / 2];
  if (!(cell > 0.0)) cell = 1.0;

  const auto gx = static_cast<long>(std::floor((world.max_x - world.min_x) / cell)) + 1;
  const auto gy = static_cast<long>(std::floor((world.max_y - world.min_y) / cell)) + 1;
  auto cell_x = [&](double x) {
    return std::clamp(static_cast<long>(std::floor((x - world.min_x) / cell)), 0L, gx - 1);
  };
  auto cell_y = [&](double y) {
    return std::clamp(static_cast<long>(std::floor((y - world.min_y) / cell)), 0L, gy - 1);
  };
  std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(gx * gy));
  for (std::size_t i = 0; i < n; ++i) {
    for (long cy = cell_y(boxes[i].min_y); cy <= cell_y(boxes[i].max_y); ++cy) {
      for (long cx = cell_x(boxes[i].min_x); cx <= cell_x(boxes[i].max_x); ++cx) {
        cells[static_cast<std::size_t>(cy * gx + cx)].push_back(i);
      }
    }
  }

  std::vector<std::size_t> stamp(n, n);  // last target that examined j
  for (std::size_t i = 0; i < n; ++i) {
    const long x0 = cell_x(boxes[i].min_x), x1 = cell_x(boxes[i].max_x);
    const long y0 = cell_y(boxes[i].min_y), y1 = cell_y(boxes[i].max_y);
    double best = std::numeric_limits<double>::infinity();
    stamp[i] = i;
    auto visit = [&](long cx, long cy) {
      if (cx < 0 || cy < 0 || cx >= gx || cy >= gy) return;
      for (std::size_t j : cells[static_cast<std::size_t>(cy * gx + cx)]) {
        if (stamp[j] == i) continue;
        stamp[j] = i;
        if (box_distance(boxes[i], boxes[j]) >= best) continue;
        const double d = boundary_distance(fps[i].polygon, fps[j].polygon);
        if (d < best) best = d;
      }
    };
    const long max_ring = std::max(gx, gy);
    for (long k = 0; k <= max_ring; ++k) {
      for (long cy = y0 - k; cy <= y1 + k; ++cy) {
        if (cy == y0 - k || cy == y1 + k || k == 0) {
          for (long cx = x0 - k; cx <= x1 + k; ++cx) visit(cx, cy);
        } else {
          visit(x0 - k, cy);
          visit(x1 + k, cy);
        }
      }
      // Anything unvisited lies at least k whole cells away.
      if (best <= static_cast<double>(k) * cell) break;
    }
    if (std::isfinite(best)) out[i] = best;
  }
  return out;
}

}  // namespace bh
