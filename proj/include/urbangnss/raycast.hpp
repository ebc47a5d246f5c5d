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
/// Ray casting against a CityModel.
///
/// Two casters implement the same contract:
///  - BruteForceCaster tests every wall and roof of every building;
///  - GridIndex bins footprints into a uniform 2D grid and walks the cells the
///    ray crosses.
/// Both call the same per-building intersection routine and pick the nearest
/// hit under one total order (distance, building index, face index), so their
/// answers are identical whenever the grid visits every candidate building.
///
/// A hit is reported only when its distance is strictly below max_range, so a
/// range equal to max_range always means "no hit".

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "urbangnss/citymodel.hpp"

namespace urbangnss {

inline constexpr double kDefaultMaxRange = 5000.0;

class Ray {
 public:
  /// `direction` must already be unit length (within 1e-12).
  Ray(const Vec3& origin, const Vec3& direction) : origin_(origin), direction_(direction) {
    if (!origin.allFinite() || !(std::abs(direction.norm() - 1.0) <= 1e-12)) {
      throw std::invalid_argument("ray direction must be a finite unit vector");
    }
  }

  /// Azimuth clockwise from north, elevation above the horizontal plane.
  static Ray from_angles(const Vec3& origin, double azimuth, double elevation) {
    const double ce = std::cos(elevation);
    Vec3 d(std::sin(azimuth) * ce, std::cos(azimuth) * ce, std::sin(elevation));
    return Ray(origin, d.normalized());
  }

  const Vec3& origin() const { return origin_; }
  const Vec3& direction() const { return direction_; }
  Vec3 at(double t) const { return origin_ + t * direction_; }

 private:
  Vec3 origin_;
  Vec3 direction_;
};

enum class FaceKind : std::uint8_t { Wall, Roof };

struct RayHit {
  double distance = 0.0;
  std::size_t building = 0;  // index into CityModel::buildings()
  std::uint32_t face = 0;    // wall index, or wall_count() for the roof
  FaceKind kind = FaceKind::Wall;

  friend bool operator==(const RayHit&, const RayHit&) = default;
};

/// Strict "a is preferred over b" order used by every caster.
inline bool preferred(const RayHit& a, const RayHit& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  if (a.building != b.building) return a.building < b.building;
  return a.face < b.face;
}

struct RayPairResult {
  double r_los = kDefaultMaxRange;  // range along the satellite direction
  double r_ref = kDefaultMaxRange;  // range along the mirror direction
  std::optional<RayHit> los_hit;
  std::optional<RayHit> ref_hit;
};

template <class C>
concept RayCaster = requires(const C& caster, const Ray& ray, double max_range) {
  { caster.cast(ray, max_range) } -> std::same_as<std::optional<RayHit>>;
};

namespace detail {

inline void offer(std::optional<RayHit>& best, const RayHit& candidate) {
  if (!best || preferred(candidate, *best)) best = candidate;
}

/// Nearest admissible intersection of `ray` with building `index`, folded
/// into `best`.
inline void intersect_building(const Ray& ray, const BuildingFootprint& b, std::size_t index,
                               double max_range, std::optional<RayHit>& best) {
  const Vec3& o = ray.origin();
  const Vec3& d = ray.direction();
  const Vec2 o2(o.x(), o.y());
  const Vec2 d2(d.x(), d.y());
  const std::size_t n = b.vertices.size();

  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& a = b.vertices[k];
    const Vec2 edge = b.vertices[(k + 1) % n] - a;
    const double denom = geometry::cross(d2, edge);
    if (denom == 0.0) continue;  // parallel to the wall plane
    const Vec2 ao = a - o2;
    const double t = geometry::cross(ao, edge) / denom;
    const double s = geometry::cross(ao, d2) / denom;
    if (s < 0.0 || s > 1.0 || t < 0.0 || !(t < max_range)) continue;
    const double z = o.z() + t * d.z();
    if (z < 0.0 || z > b.height) continue;
    offer(best, RayHit{t, index, static_cast<std::uint32_t>(k), FaceKind::Wall});
  }

  if (d.z() != 0.0) {
    const double t = (b.height - o.z()) / d.z();
    if (t >= 0.0 && t < max_range &&
        geometry::point_in_polygon(b.vertices, o.x() + t * d.x(), o.y() + t * d.y())) {
      offer(best, RayHit{t, index, static_cast<std::uint32_t>(n), FaceKind::Roof});
    }
  }
}

inline void check_range(double max_range) {
  if (!(max_range > 0.0)) throw std::invalid_argument("max_range must be positive");
}

}  // namespace detail

/// Reference caster: every face of every building.
class BruteForceCaster {
 public:
  explicit BruteForceCaster(const CityModel& model) : model_(&model) {}

  std::optional<RayHit> cast(const Ray& ray, double max_range) const {
    detail::check_range(max_range);
    std::optional<RayHit> best;
    const auto& buildings = model_->buildings();
    for (std::size_t i = 0; i < buildings.size(); ++i) {
      detail::intersect_building(ray, buildings[i], i, max_range, best);
    }
    return best;
  }

  const CityModel& model() const { return *model_; }

 private:
  const CityModel* model_;
};

inline std::optional<RayHit> cast_ray(const CityModel& model, const Ray& ray, double max_range) {
  return BruteForceCaster(model).cast(ray, max_range);
}

/// Uniform 2D grid over building footprints. Holds a pointer to the model,
/// which must outlive the index.
class GridIndex {
 public:
  explicit GridIndex(const CityModel& model) : model_(&model) { build(); }

  std::optional<RayHit> cast(const Ray& ray, double max_range) const {
    detail::check_range(max_range);
    std::optional<RayHit> best;
    if (model_->empty()) return best;

    const Vec3& o = ray.origin();
    const Vec3& d = ray.direction();

    // Parametric interval in which a hit is geometrically possible.
    double t_lo = 0.0;
    double t_hi = max_range;
    if (d.z() > 0.0) {
      if (o.z() > max_height_) return best;
      t_hi = std::min(t_hi, (max_height_ - o.z()) / d.z());
    } else if (d.z() < 0.0) {
      if (o.z() < 0.0) return best;
      t_hi = std::min(t_hi, o.z() / -d.z());
    } else if (o.z() < 0.0 || o.z() > max_height_) {
      return best;
    }
    for (int axis = 0; axis < 2; ++axis) {
      const double lo = min_[axis];
      const double hi = lo + cell_[axis] * static_cast<double>(dims_[axis]);
      if (d[axis] == 0.0) {
        if (o[axis] < lo || o[axis] > hi) return best;
        continue;
      }
      double t0 = (lo - o[axis]) / d[axis];
      double t1 = (hi - o[axis]) / d[axis];
      if (t0 > t1) std::swap(t0, t1);
      t_lo = std::max(t_lo, t0);
      t_hi = std::min(t_hi, t1);
    }
    const double slack = kSlack * (1.0 + std::abs(t_hi));
    t_hi += slack;
    if (t_lo > t_hi) return best;

    // Amanatides-Woo traversal starting at the entry point.
    int cell[2];
    int step[2];
    double t_next[2];
    double t_delta[2];
    for (int axis = 0; axis < 2; ++axis) {
      const double p = o[axis] + t_lo * d[axis];
      int c = static_cast<int>(std::floor((p - min_[axis]) / cell_[axis]));
      c = std::clamp(c, 0, dims_[axis] - 1);
      cell[axis] = c;
      if (d[axis] > 0.0) {
        step[axis] = 1;
        t_next[axis] = (min_[axis] + (c + 1) * cell_[axis] - o[axis]) / d[axis];
        t_delta[axis] = cell_[axis] / d[axis];
      } else if (d[axis] < 0.0) {
        step[axis] = -1;
        t_next[axis] = (min_[axis] + c * cell_[axis] - o[axis]) / d[axis];
        t_delta[axis] = -cell_[axis] / d[axis];
      } else {
        step[axis] = 0;
        t_next[axis] = std::numeric_limits<double>::infinity();
        t_delta[axis] = std::numeric_limits<double>::infinity();
      }
    }

    const auto& buildings = model_->buildings();
    while (true) {
      const auto& bucket = cells_[static_cast<std::size_t>(cell[1]) * dims_[0] + cell[0]];
      for (const std::uint32_t bi : bucket) {
        detail::intersect_building(ray, buildings[bi], bi, max_range, best);
      }
      const int axis = t_next[0] < t_next[1] ? 0 : 1;
      const double t_exit = t_next[axis];
      if (t_exit > t_hi) break;
      // Later cells only hold hits at t >= t_exit (up to rounding).
      if (best && best->distance + kSlack * (1.0 + best->distance) < t_exit) break;
      cell[axis] += step[axis];
      if (cell[axis] < 0 || cell[axis] >= dims_[axis]) break;
      t_next[axis] += t_delta[axis];
    }
    return best;
  }

  const CityModel& model() const { return *model_; }
  int columns() const { return dims_[0]; }
  int rows() const { return dims_[1]; }

 private:
  static constexpr double kSlack = 1e-7;

  void build() {
    if (model_->empty()) return;
    const auto& box = model_->bounds();
    max_height_ = box.max_height;
    const Vec2 extent = box.max - box.min;
    const double pad = 1e-6 * (1.0 + extent.maxCoeff());
    min_[0] = box.min.x() - pad;
    min_[1] = box.min.y() - pad;
    const double span[2] = {extent.x() + 2.0 * pad, extent.y() + 2.0 * pad};

    // Roughly one building per cell, at most 1024 cells per axis.
    const double target = std::sqrt(static_cast<double>(model_->size()));
    const double aspect = span[0] / span[1];
    dims_[0] = std::clamp(static_cast<int>(std::ceil(target * std::sqrt(aspect))), 1, 1024);
    dims_[1] = std::clamp(static_cast<int>(std::ceil(target / std::sqrt(aspect))), 1, 1024);
    cell_[0] = span[0] / dims_[0];
    cell_[1] = span[1] / dims_[1];
    cells_.assign(static_cast<std::size_t>(dims_[0]) * dims_[1], {});

    const auto& buildings = model_->buildings();
    for (std::size_t i = 0; i < buildings.size(); ++i) {
      Vec2 lo = buildings[i].vertices.front();
      Vec2 hi = lo;
      for (const auto& v : buildings[i].vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
      }
      // Pad so that hits on a cell boundary are visible from both sides.
      const int c0 = cell_of(lo.x() - pad, 0);
      const int c1 = cell_of(hi.x() + pad, 0);
      const int r0 = cell_of(lo.y() - pad, 1);
      const int r1 = cell_of(hi.y() + pad, 1);
      for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
          cells_[static_cast<std::size_t>(r) * dims_[0] + c].push_back(
              static_cast<std::uint32_t>(i));
        }
      }
    }
  }

  int cell_of(double coord, int axis) const {
    const int c = static_cast<int>(std::floor((coord - min_[axis]) / cell_[axis]));
    return std::clamp(c, 0, dims_[axis] - 1);
  }

  const CityModel* model_;
  double min_[2] = {0.0, 0.0};
  double cell_[2] = {1.0, 1.0};
  int dims_[2] = {0, 0};
  double max_height_ = 0.0;
  std::vector<std::vector<std::uint32_t>> cells_;
};

inline GridIndex build_index(const CityModel& model) { return GridIndex(model); }

/// Casts the line-of-sight ray toward (azimuth, elevation) and the mirror ray
/// toward (azimuth + pi, elevation) from the receiver.
template <RayCaster Caster>
RayPairResult cast_satellite_rays(const Caster& caster, const Vec3& receiver, double azimuth,
                                  double elevation, double max_range = kDefaultMaxRange) {
  if (!(elevation >= 0.0 && elevation <= constants::kPi / 2.0)) {
    throw std::invalid_argument("elevation must lie in [0, pi/2]");
  }
  RayPairResult out;
  out.los_hit = caster.cast(Ray::from_angles(receiver, azimuth, elevation), max_range);
  out.ref_hit = caster.cast(Ray::from_angles(receiver, azimuth + constants::kPi, elevation),
                            max_range);
  out.r_los = out.los_hit ? out.los_hit->distance : max_range;
  out.r_ref = out.ref_hit ? out.ref_hit->distance : max_range;
  return out;
}

inline RayPairResult cast_satellite_rays(const CityModel& model, const Vec3& receiver,
                                         double azimuth, double elevation,
                                         double max_range = kDefaultMaxRange) {
  return cast_satellite_rays(BruteForceCaster(model), receiver, azimuth, elevation, max_range);
}

}  // namespace urbangnss
