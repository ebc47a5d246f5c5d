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
/// Single-direction ray diagnostics.

#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "urbangnss/channel.hpp"
#include "urbangnss/scenario.hpp"

namespace urbangnss {

struct RaycheckReport {
  RayPairResult rays;
  Visibility visibility = Visibility::LosClear;
  double multipath_offset = 0.0;
  double max_range = kDefaultMaxRange;
};

/// Casts the LOS and mirror rays for one direction; the elevation mask is not
/// applied.
inline RaycheckReport raycheck(const CityModel& model, const Vec3& receiver, double azimuth,
                               double elevation, double max_range = kDefaultMaxRange) {
  RaycheckReport rep;
  rep.max_range = max_range;
  rep.rays = cast_satellite_rays(model, receiver, azimuth, elevation, max_range);
  rep.visibility = classify_visibility(rep.rays, max_range);
  if (rep.visibility == Visibility::Multipath) rep.multipath_offset = multipath_offset(rep.rays.r_ref, elevation);
  return rep;
}

inline std::string describe_hit(const CityModel& model, const std::optional<RayHit>& hit) {
  if (!hit) return "none";
  const auto& b = model.building(hit->building);
  std::string face = hit->kind == FaceKind::Roof ? "roof" : "wall " + std::to_string(hit->face);
  return "building '" + b.id + "' " + face;
}

inline void print_report(const RaycheckReport& rep, const CityModel& model, std::ostream& out) {
  out << "r_los: " << detail::fmt(rep.rays.r_los) << " (" << describe_hit(model, rep.rays.los_hit) << ")\n"
      << "r_ref: " << detail::fmt(rep.rays.r_ref) << " (" << describe_hit(model, rep.rays.ref_hit) << ")\n"
      << "visibility: " << to_string(rep.visibility) << '\n';
  if (rep.visibility == Visibility::Multipath) out << "m: " << detail::fmt(rep.multipath_offset) << '\n';
}

}  // namespace urbangnss
