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

#include <fstream>
#include <sstream>

#include "bh/error.hpp"
#include "bh/geometry.hpp"
#include "json.hpp"

namespace bh {

namespace {

using nlohmann::json;

Ring parse_ring(const json& coords, const std::string& where) {
  if (!coords.is_array()) throw Error(ErrorKind::kFormat, where + ": ring is not an array");
  Ring ring;
  ring.reserve(coords.size());
  for (const json& pt : coords) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number()) {
      throw Error(ErrorKind::kFormat, where + ": bad coordinate");
    }
    ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  return open_ring(std::move(ring));
}

json ring_to_json(const Ring& ring) {
  json out = json::array();
  for (const Point& p : ring) out.push_back({p.x, p.y});
  if (!ring.empty()) out.push_back({ring.front().x, ring.front().y});
  return out;
}

}  // namespace

FootprintSet parse_footprints(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kFormat, std::string("GeoJSON parse error: ") + e.what());
  }
  if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw Error(ErrorKind::kFormat, "expected a GeoJSON FeatureCollection");
  }
  FootprintSet out;
  std::size_t index = 0;
  for (const json& feature : doc["features"]) {
    const std::string where = "feature #" + std::to_string(index++);
    if (!feature.is_object() || !feature.contains("geometry") ||
        !feature["geometry"].is_object()) {
      throw Error(ErrorKind::kFormat, where + ": missing geometry");
    }
    const json& geom = feature["geometry"];
    const std::string type = geom.value("type", "");
    if (type == "MultiPolygon") {
      throw Error(ErrorKind::kFormat,
                  where + ": MultiPolygon geometries are not supported; split them "
                          "into separate Polygon features");
    }
    if (type != "Polygon") {
      throw Error(ErrorKind::kFormat, where + ": unsupported geometry type '" + type + "'");
    }
    const json& rings = geom.at("coordinates");
    if (!rings.is_array() || rings.empty()) {
      throw Error(ErrorKind::kFormat, where + ": Polygon without rings");
    }
    Footprint fp;
    fp.polygon.exterior = parse_ring(rings[0], where);
    for (std::size_t r = 1; r < rings.size(); ++r) {
      fp.polygon.holes.push_back(parse_ring(rings[r], where));
    }
    const json props = feature.value("properties", json::object());
    if (!props.contains("id") || !props["id"].is_string()) {
      throw Error(ErrorKind::kFormat, where + ": properties.id (string) is required");
    }
    fp.id = props["id"].get<std::string>();
    if (props.contains("ref_height_m") && !props["ref_height_m"].is_null()) {
      if (!props["ref_height_m"].is_number()) {
        throw Error(ErrorKind::kFormat, where + ": ref_height_m must be a number");
      }
      fp.ref_height_m = props["ref_height_m"].get<double>();
    }
    out.push_back(std::move(fp));
  }
  validate(out);
  return out;
}

FootprintSet read_footprints(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open footprints " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_footprints(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_footprints(const FootprintSet& footprints,
                      const std::filesystem::path& path) {
  json features = json::array();
  for (const Footprint& f : footprints) {
    json rings = json::array();
    rings.push_back(ring_to_json(f.polygon.exterior));
    for (const Ring& h : f.polygon.holes) rings.push_back(ring_to_json(h));
    json props = {{"id", f.id}};
    if (f.ref_height_m) props["ref_height_m"] = *f.ref_height_m;
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", rings}}},
                        {"properties", props}});
  }
  const json doc = {{"type", "FeatureCollection"}, {"features", features}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

}  // namespace bh
