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

#ifndef BH_POLYGON_HPP_
#define BH_POLYGON_HPP_

#include <optional>
#include <string>
#include <vector>

namespace bh {

// Planar coordinates in meters. No CRS handling anywhere in the library.
struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

// Implicitly closed vertex ring: the first vertex is not repeated at the end.
using Ring = std::vector<Point>;

struct Polygon {
  Ring exterior;
  std::vector<Ring> holes;

  // Throws kGeometry unless every ring has >= 3 distinct vertices, is stored
  // open, and the exterior has non-zero signed area.
  void validate() const;
};

// Drops a trailing vertex that repeats the first one (GeoJSON stores closed
// rings).
Ring open_ring(Ring ring);

double signed_area(const Ring& ring);

struct BoundingBox {
  double min_x, min_y, max_x, max_y;
};

BoundingBox bounding_box(const Ring& ring);

struct Footprint {
  std::string id;
  Polygon polygon;
  std::optional<double> ref_height_m;
};

using FootprintSet = std::vector<Footprint>;

// Throws kGeometry on duplicate ids, invalid polygons or non-positive heights.
void validate(const FootprintSet& footprints);

}  // namespace bh

#endif  // BH_POLYGON_HPP_
