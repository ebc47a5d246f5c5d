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
/// WGS-84 geodetic, ECEF and local East-North-Up conversions.
///
/// The simulator works in a single local ENU tangent frame anchored at the
/// city origin. Conversions between that frame and ECEF are carried out in
/// extended precision: an ECEF coordinate is ~6.4e6 m, so a double has a
/// resolution of ~1e-9 m there, which is the same order as the round-trip
/// tolerance the frame has to honour.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

#include "urbangnss/constants.hpp"

namespace urbangnss {

using Vec3 = Eigen::Vector3d;

/// Geodetic coordinates on the WGS-84 ellipsoid. Angles in radians,
/// altitude in metres above the ellipsoid.
struct Geodetic {
  double latitude = 0.0;
  double longitude = 0.0;
  double altitude = 0.0;

  static Geodetic from_degrees(double lat_deg, double lon_deg, double alt_m) {
    return {lat_deg * constants::kDegToRad, lon_deg * constants::kDegToRad, alt_m};
  }
};

/// Anchor of the local tangent frame.
using GeodeticOrigin = Geodetic;

inline void validate_geodetic(const Geodetic& p) {
  if (!(std::abs(p.latitude) <= constants::kPi / 2.0)) {
    throw std::invalid_argument("geodetic latitude outside [-pi/2, pi/2]");
  }
  if (!(std::abs(p.longitude) <= constants::kPi)) {
    throw std::invalid_argument("geodetic longitude outside [-pi, pi]");
  }
  if (!std::isfinite(p.altitude)) {
    throw std::invalid_argument("geodetic altitude is not finite");
  }
}

namespace detail {

using Real = long double;
using RealVec = std::array<Real, 3>;

inline RealVec geodetic_to_ecef_ext(const Geodetic& p) {
  const Real a = constants::kWgs84A;
  const Real e2 = constants::kWgs84E2;
  const Real lat = p.latitude;
  const Real lon = p.longitude;
  const Real h = p.altitude;
  const Real sin_lat = std::sin(lat);
  const Real cos_lat = std::cos(lat);
  const Real n = a / std::sqrt(1.0L - e2 * sin_lat * sin_lat);
  return {(n + h) * cos_lat * std::cos(lon), (n + h) * cos_lat * std::sin(lon),
          (n * (1.0L - e2) + h) * sin_lat};
}

inline Geodetic ecef_to_geodetic_ext(const RealVec& r) {
  const Real a = constants::kWgs84A;
  const Real e2 = constants::kWgs84E2;
  const Real p = std::hypot(r[0], r[1]);
  const Real lon = std::atan2(r[1], r[0]);

  Real lat = std::atan2(r[2], p * (1.0L - e2));
  for (int i = 0; i < 30; ++i) {
    const Real s = std::sin(lat);
    const Real n = a / std::sqrt(1.0L - e2 * s * s);
    const Real next = std::atan2(r[2] + e2 * n * s, p);
    const bool done = std::abs(next - lat) < 1e-19L;
    lat = next;
    if (done) break;
  }
  const Real s = std::sin(lat);
  const Real c = std::cos(lat);
  const Real n = a / std::sqrt(1.0L - e2 * s * s);
  // Pick the better-conditioned height formula.
  const Real h = (std::abs(c) > std::abs(s)) ? p / c - n : r[2] / s - n * (1.0L - e2);
  return {static_cast<double>(lat), static_cast<double>(lon), static_cast<double>(h)};
}

/// Rows are the east, north and up unit vectors expressed in ECEF.
inline std::array<RealVec, 3> enu_basis_ext(const Geodetic& origin) {
  const Real sl = std::sin(static_cast<Real>(origin.latitude));
  const Real cl = std::cos(static_cast<Real>(origin.latitude));
  const Real so = std::sin(static_cast<Real>(origin.longitude));
  const Real co = std::cos(static_cast<Real>(origin.longitude));
  return {RealVec{-so, co, 0.0L}, RealVec{-sl * co, -sl * so, cl},
          RealVec{cl * co, cl * so, sl}};
}

inline Vec3 rotate_to_enu(const std::array<RealVec, 3>& basis, const RealVec& d) {
  Vec3 out;
  for (int row = 0; row < 3; ++row) {
    out[row] = static_cast<double>(basis[row][0] * d[0] + basis[row][1] * d[1] +
                                   basis[row][2] * d[2]);
  }
  return out;
}

inline RealVec rotate_from_enu(const std::array<RealVec, 3>& basis, const Vec3& v) {
  RealVec out{0.0L, 0.0L, 0.0L};
  for (int col = 0; col < 3; ++col) {
    for (int row = 0; row < 3; ++row) {
      out[col] += basis[row][col] * static_cast<Real>(v[row]);
    }
  }
  return out;
}

}  // namespace detail

inline Vec3 geodetic_to_ecef(const Geodetic& p) {
  const auto r = detail::geodetic_to_ecef_ext(p);
  return {static_cast<double>(r[0]), static_cast<double>(r[1]), static_cast<double>(r[2])};
}

inline Geodetic ecef_to_geodetic(const Vec3& r) {
  return detail::ecef_to_geodetic_ext({r.x(), r.y(), r.z()});
}

/// Rotation taking ECEF difference vectors into the ENU frame at `origin`.
inline Eigen::Matrix3d ecef_to_enu_rotation(const Geodetic& origin) {
  const auto basis = detail::enu_basis_ext(origin);
  Eigen::Matrix3d rot;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot(r, c) = static_cast<double>(basis[r][c]);
  }
  return rot;
}

/// East/north/up metres of `p` relative to `origin`.
inline Vec3 geodetic_to_local(const Geodetic& p, const GeodeticOrigin& origin) {
  validate_geodetic(p);
  const auto rp = detail::geodetic_to_ecef_ext(p);
  const auto ro = detail::geodetic_to_ecef_ext(origin);
  return detail::rotate_to_enu(detail::enu_basis_ext(origin),
                               {rp[0] - ro[0], rp[1] - ro[1], rp[2] - ro[2]});
}

inline Geodetic local_to_geodetic(const Vec3& enu, const GeodeticOrigin& origin) {
  const auto ro = detail::geodetic_to_ecef_ext(origin);
  const auto d = detail::rotate_from_enu(detail::enu_basis_ext(origin), enu);
  return detail::ecef_to_geodetic_ext({ro[0] + d[0], ro[1] + d[1], ro[2] + d[2]});
}

inline Vec3 ecef_to_local(const Vec3& p, const GeodeticOrigin& origin) {
  const auto ro = detail::geodetic_to_ecef_ext(origin);
  const detail::RealVec d{static_cast<detail::Real>(p.x()) - ro[0],
                          static_cast<detail::Real>(p.y()) - ro[1],
                          static_cast<detail::Real>(p.z()) - ro[2]};
  return detail::rotate_to_enu(detail::enu_basis_ext(origin), d);
}

inline Vec3 local_to_ecef(const Vec3& enu, const GeodeticOrigin& origin) {
  const auto ro = detail::geodetic_to_ecef_ext(origin);
  const auto d = detail::rotate_from_enu(detail::enu_basis_ext(origin), enu);
  return {static_cast<double>(ro[0] + d[0]), static_cast<double>(ro[1] + d[1]),
          static_cast<double>(ro[2] + d[2])};
}

}  // namespace urbangnss
