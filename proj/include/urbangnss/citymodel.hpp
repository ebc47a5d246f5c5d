// Copyright 2026 The urbangnss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied. See the License for the specific language governing
// permissions and limitations under the License.

/// @file
/// City geometry: buildings are vertical prisms (a simple polygon footprint
/// extruded from the ground plane z = 0 up to a roof height) in the local
/// ENU frame of a geodetic origin.
///
/// Footprints are normalised on construction: consecutive duplicate vertices
/// (including a closing vertex equal to the first) are collapsed, the winding
/// is made counter-clockwise, and degenerate or self-intersecting outlines are
/// rejected with a CityModelError naming the building.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "urbangnss/geodesy.hpp"

namespace urbangnss {

using Vec2 = Eigen::Vector2d;

class CityModelError : public std::runtime_error {
 public:
  CityModelError(std::string building_id, const std::string& what)
      : std::runtime_error(building_id.empty() ? what
                                               : "building '" + building_id + "': " + what),
        building_id_(std::move(building_id)) {}

  const std::string& building_id() const noexcept { return building_id_; }

 private:
  std::string building_id_;
};

struct BuildingFootprint {
  std::string id;
  std::vector<Vec2> vertices;  // local east/north metres
  double height = 0.0;         // roof height above z = 0 [m]

  /// Number of wall faces; wall k joins vertex k to vertex k+1 (cyclic).
  std::size_t wall_count() const { return vertices.size(); }
};

struct BoundingBox {
  Vec2 min{0.0, 0.0};
  Vec2 max{0.0, 0.0};
  double max_height = 0.0;

  bool contains(const Vec2& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
  }
};

namespace geometry {

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline double signed_area(const std::vector<Vec2>& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    twice += cross(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * twice;
}

inline int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

inline bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

/// Closed-segment intersection test (touching counts).
inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

inline bool is_simple(const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const Vec2& c = poly[(i + 2) % n];
    // Adjacent edges may only share their common vertex: reject fold-backs.
    if (orientation(a, b, c) == 0 && (b - a).dot(c - b) < 0.0) return false;
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the wrap-around
      if (segments_intersect(a, b, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

/// Even-odd point-in-polygon test. Edges use a half-open convention, so a
/// point on a shared boundary is assigned consistently.
inline bool point_in_polygon(const std::vector<Vec2>& poly, double x, double y) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& pi = poly[i];
    const Vec2& pj = poly[j];
    if ((pi.y() > y) != (pj.y() > y)) {
      const double x_cross = pj.x() + (y - pj.y()) * (pi.x() - pj.x()) / (pi.y() - pj.y());
      if (x < x_cross) inside = !inside;
    }
  }
  return inside;
}

}  // namespace geometry

/// Validates and normalises a footprint; throws CityModelError on failure.
inline BuildingFootprint normalize_footprint(BuildingFootprint b) {
  if (!(b.height > 0.0) || !std::isfinite(b.height)) {
    throw CityModelError(b.id, "height must be positive");
  }
  for (const auto& v : b.vertices) {
    if (!v.allFinite()) throw CityModelError(b.id, "non-finite footprint vertex");
  }
  std::vector<Vec2> collapsed;
  collapsed.reserve(b.vertices.size());
  for (const auto& v : b.vertices) {
    if (collapsed.empty() || collapsed.back() != v) collapsed.push_back(v);
  }
  while (collapsed.size() > 1 && collapsed.front() == collapsed.back()) collapsed.pop_back();

  if (collapsed.size() < 3) {
    throw CityModelError(b.id, "footprint needs at least 3 distinct vertices, got " +
                                   std::to_string(collapsed.size()));
  }
  const double area = geometry::signed_area(collapsed);
  if (area == 0.0) throw CityModelError(b.id, "footprint has zero area");
  if (!geometry::is_simple(collapsed)) {
    throw CityModelError(b.id, "footprint polygon is self-intersecting");
  }
  if (area < 0.0) std::reverse(collapsed.begin(), collapsed.end());
  b.vertices = std::move(collapsed);
  return b;
}

/// Immutable set of prisms in the local frame of `origin`.
class CityModel {
 public:
  CityModel() = default;

  CityModel(GeodeticOrigin origin, std::vector<BuildingFootprint> buildings)
      : origin_(origin) {
    validate_geodetic(origin_);
    buildings_.reserve(buildings.size());
    std::unordered_set<std::string> ids;
    for (auto& b : buildings) {
      if (!ids.insert(b.id).second) throw CityModelError(b.id, "duplicate building id");
      buildings_.push_back(normalize_footprint(std::move(b)));
    }
    compute_bounds();
  }

  const GeodeticOrigin& origin() const { return origin_; }
  const std::vector<BuildingFootprint>& buildings() const { return buildings_; }
  const BuildingFootprint& building(std::size_t i) const { return buildings_.at(i); }
  std::size_t size() const { return buildings_.size(); }
  bool empty() const { return buildings_.empty(); }
  const BoundingBox& bounds() const { return bounds_; }

  /// Walls plus one roof per building.
  std::size_t face_count() const {
    std::size_t n = 0;
    for (const auto& b : buildings_) n += b.wall_count() + 1;
    return n;
  }

 private:
  void compute_bounds() {
    if (buildings_.empty()) return;
    const double inf = std::numeric_limits<double>::infinity();
    bounds_.min = Vec2(inf, inf);
    bounds_.max = Vec2(-inf, -inf);
    for (const auto& b : buildings_) {
      for (const auto& v : b.vertices) {
        bounds_.min = bounds_.min.cwiseMin(v);
        bounds_.max = bounds_.max.cwiseMax(v);
      }
      bounds_.max_height = std::max(bounds_.max_height, b.height);
    }
  }

  GeodeticOrigin origin_{};
  std::vector<BuildingFootprint> buildings_;
  BoundingBox bounds_{};
};

namespace detail {

inline std::string building_id_from_json(const nlohmann::json& j, std::size_t index) {
  if (!j.contains("id")) return "#" + std::to_string(index);
  const auto& id = j.at("id");
  if (id.is_string()) return id.get<std::string>();
  if (id.is_number_integer()) return std::to_string(id.get<long long>());
  throw CityModelError("#" + std::to_string(index), "id must be a string or integer");
}

inline Vec2 pair_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() < 2 || !j[0].is_number() || !j[1].is_number()) {
    throw std::invalid_argument("expected a [number, number] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

/// Builds a model from a parsed building-set document. Geodetic footprints
/// (`footprint`, [lat_deg, lon_deg] pairs) are projected into the local frame;
/// `footprint_local_m` ([east, north] pairs) is taken as-is.
inline CityModel parse_city_model(const nlohmann::json& doc) {
  if (!doc.is_object()) throw CityModelError("", "building set must be a JSON object");
  GeodeticOrigin origin;
  try {
    const auto& o = doc.at("origin");
    origin = Geodetic::from_degrees(o.at("lat_deg").get<double>(), o.at("lon_deg").get<double>(),
                                    o.value("alt_m", 0.0));
    validate_geodetic(origin);
  } catch (const nlohmann::json::exception& e) {
    throw CityModelError("", std::string("invalid origin: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CityModelError("", std::string("invalid origin: ") + e.what());
  }

  std::vector<BuildingFootprint> buildings;
  const auto list = doc.value("buildings", nlohmann::json::array());
  if (!list.is_array()) throw CityModelError("", "'buildings' must be an array");
  buildings.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& jb = list[i];
    BuildingFootprint b;
    b.id = detail::building_id_from_json(jb, i);
    try {
      b.height = jb.at("height_m").get<double>();
      if (jb.contains("footprint_local_m")) {
        for (const auto& v : jb.at("footprint_local_m")) b.vertices.push_back(detail::pair_from_json(v));
      } else {
        for (const auto& v : jb.at("footprint")) {
          const Vec2 latlon = detail::pair_from_json(v);
          const Vec3 enu = geodetic_to_local(
              Geodetic::from_degrees(latlon.x(), latlon.y(), origin.altitude), origin);
          b.vertices.emplace_back(enu.x(), enu.y());
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw CityModelError(b.id, e.what());
    } catch (const std::invalid_argument& e) {
      throw CityModelError(b.id, e.what());
    }
    buildings.push_back(std::move(b));
  }
  return CityModel(origin, std::move(buildings));
}

inline CityModel load_city_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CityModelError("", "cannot open building set '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw CityModelError("", "parse error in '" + path.string() + "': " + e.what());
  }
  return parse_city_model(doc);
}

/// Serialises the normalised geometry using the local-frame variant.
inline nlohmann::json to_json(const CityModel& model) {
  nlohmann::json doc;
  doc["origin"] = {{"lat_deg", model.origin().latitude * constants::kRadToDeg},
                   {"lon_deg", model.origin().longitude * constants::kRadToDeg},
                   {"alt_m", model.origin().altitude}};
  doc["buildings"] = nlohmann::json::array();
  for (const auto& b : model.buildings()) {
    nlohmann::json fp = nlohmann::json::array();
    for (const auto& v : b.vertices) fp.push_back({v.x(), v.y()});
    doc["buildings"].push_back({{"id", b.id}, {"height_m", b.height}, {"footprint_local_m", fp}});
  }
  return doc;
}

inline void save_city_model(const CityModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << to_json(model).dump(2) << '\n';
}

}  // namespace urbangnss
