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

#ifndef BH_GEOMETRY_HPP_
#define BH_GEOMETRY_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "bh/polygon.hpp"

namespace bh {

struct MinBoundingGeometry {
  double width_m = 0.0;    // short side
  double length_m = 0.0;   // long side
  double orientation_deg = 0.0;  // CCW from +x to the long side, in [0, 180)
};

// Counterclockwise hull without collinear vertices, starting at the
// lowest-x (then lowest-y) point. Throws kDegenerate for fewer than three
// non-collinear points.
Ring convex_hull(std::span<const Point> points);

// Minimum-area enclosing rectangle of the exterior ring by rotating calipers
// over its hull. Area ties resolve to the smallest orientation.
MinBoundingGeometry min_bounding_rect(const Polygon& polygon);

// Same, for a ring already known to be a strictly convex CCW hull.
MinBoundingGeometry min_bounding_rect_of_hull(const Ring& hull);

double polygon_area(const Polygon& polygon);
Point centroid(const Polygon& polygon);

double point_segment_distance(Point p, Point a, Point b);
// Zero when the closed segments intersect.
double segment_distance(Point a0, Point a1, Point b0, Point b1);

// Boundary-to-boundary distance between two exteriors; 0 when the boundaries
// touch or cross, or when one exterior contains the other.
double boundary_distance(const Polygon& a, const Polygon& b);

// Nearest boundary distance from footprint `target` to any other footprint.
// std::nullopt when there is no other footprint.
std::optional<double> near_distance(const Footprint& target,
                                    std::span<const Footprint> others);

// Near distance for every footprint, using a uniform grid whose cell size is
// twice the median footprint diameter. Rings of cells are searched outward
// until no unvisited cell can beat the current best, so results equal the
// all-pairs minimum exactly.
std::vector<std::optional<double>> near_distances(std::span<const Footprint> footprints);

// --- GeoJSON -------------------------------------------------------------------

// FeatureCollection of Polygon features with properties `id` (string,
// required) and `ref_height_m` (number, optional). MultiPolygon and other
// geometry types are rejected with kFormat.
FootprintSet read_footprints(const std::filesystem::path& path);
FootprintSet parse_footprints(const std::string& geojson_text);
void write_footprints(const FootprintSet& footprints,
                      const std::filesystem::path& path);

}  // namespace bh

#endif  // BH_GEOMETRY_HPP_
