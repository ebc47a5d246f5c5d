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
/// Satellite sources. Positions either come from two-body Keplerian
/// propagation of an ephemeris, or are synthesised from fixed
/// azimuth/elevation lists. Both produce SatelliteState, so nothing
/// downstream cares which one was used.

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Geometry>
#include <json.hpp>

#include "urbangnss/geodesy.hpp"

namespace urbangnss {

class KeplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeplerianEphemeris {
  int prn = 0;
  double semi_major_axis = 0.0;   // [m]
  double eccentricity = 0.0;      // [0, 1)
  double inclination = 0.0;       // [rad]
  double raan = 0.0;              // right ascension of ascending node [rad]
  double arg_perigee = 0.0;       // [rad]
  double mean_anomaly = 0.0;      // at epoch [rad]
  double epoch = 0.0;             // [s]

  void validate() const {
    if (!(semi_major_axis > 0.0)) {
      throw std::invalid_argument("PRN " + std::to_string(prn) + ": semi-major axis must be > 0");
    }
    if (!(eccentricity >= 0.0 && eccentricity < 1.0)) {
      throw std::invalid_argument("PRN " + std::to_string(prn) + ": eccentricity must be in [0, 1)");
    }
  }

  double mean_motion() const {
    return std::sqrt(constants::kEarthMu / (semi_major_axis * semi_major_axis * semi_major_axis));
  }
  double period() const { return 2.0 * constants::kPi / mean_motion(); }
};

struct SatelliteState {
  int prn = 0;
  Vec3 position_ecef = Vec3::Zero();
  Vec3 position_local = Vec3::Zero();
  double azimuth = 0.0;    // clockwise from north, [0, 2pi)
  double elevation = 0.0;  // [-pi/2, pi/2]
};

struct FixedSatellite {
  int prn = 0;
  double azimuth = 0.0;
  double elevation = 0.0;
  double nominal_range = 2.0e7;
};

struct AzimuthElevation {
  double azimuth = 0.0;
  double elevation = 0.0;
};

/// Solves E - e sin E = M. Safeguarded Newton: the root is bracketed in
/// [M - e, M + e] and any Newton step leaving the bracket is replaced by
/// bisection.
inline double solve_kepler(double mean_anomaly, double e) {
  if (!(e >= 0.0 && e < 1.0)) throw std::invalid_argument("eccentricity must be in [0, 1)");
  if (!std::isfinite(mean_anomaly)) throw std::invalid_argument("mean anomaly is not finite");
  if (e == 0.0) return mean_anomaly;

  // Work on the reduced anomaly; E - M is 2pi-periodic in M.
  const double two_pi = 2.0 * constants::kPi;
  const double turns = std::floor((mean_anomaly + constants::kPi) / two_pi);
  const double m = mean_anomaly - turns * two_pi;

  const auto f = [&](double x) { return x - e * std::sin(x) - m; };
  double lo = m - e;
  double hi = m + e;
  double x = m + e * std::sin(m);  // first-order start
  if (x < lo || x > hi) x = 0.5 * (lo + hi);

  constexpr int kMaxIterations = 50;
  for (int i = 0; i < kMaxIterations; ++i) {
    const double fx = f(x);
    if (std::abs(fx) < 1e-15) return x + turns * two_pi;
    if (fx > 0.0) hi = x; else lo = x;
    double next = x - fx / (1.0 - e * std::cos(x));
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x))) {
      return next + turns * two_pi;
    }
    x = next;
  }
  if (std::abs(f(x)) < 1e-12) return x + turns * two_pi;
  throw KeplerError("Kepler equation did not converge (M=" + std::to_string(mean_anomaly) +
                    ", e=" + std::to_string(e) + ")");
}

struct OrbitState {
  Vec3 position = Vec3::Zero();  // inertial [m]
  Vec3 velocity = Vec3::Zero();  // inertial [m/s]
};

/// Two-body propagation in the inertial frame.
inline OrbitState propagate_orbit(const KeplerianEphemeris& eph, double t) {
  eph.validate();
  const double a = eph.semi_major_axis;
  const double e = eph.eccentricity;
  const double n = eph.mean_motion();
  const double ecc_anomaly = solve_kepler(eph.mean_anomaly + n * (t - eph.epoch), e);

  const double cos_e = std::cos(ecc_anomaly);
  const double sin_e = std::sin(ecc_anomaly);
  const double b_over_a = std::sqrt(1.0 - e * e);
  const double r = a * (1.0 - e * cos_e);

  // Perifocal frame: x toward perigee, z along the orbit normal.
  const Vec3 pos_pf(a * (cos_e - e), a * b_over_a * sin_e, 0.0);
  const double e_dot = n * a / r;
  const Vec3 vel_pf(-a * sin_e * e_dot, a * b_over_a * cos_e * e_dot, 0.0);

  const Eigen::Matrix3d to_inertial =
      (Eigen::AngleAxisd(eph.raan, Vec3::UnitZ()) * Eigen::AngleAxisd(eph.inclination, Vec3::UnitX()) *
       Eigen::AngleAxisd(eph.arg_perigee, Vec3::UnitZ()))
          .toRotationMatrix();
  return {to_inertial * pos_pf, to_inertial * vel_pf};
}

/// Satellite position at time t. With earth_rotation the inertial frame is
/// taken to coincide with ECEF at t = 0 and Earth turns uniformly after that.
inline Vec3 propagate_kepler(const KeplerianEphemeris& eph, double t, bool earth_rotation) {
  const Vec3 inertial = propagate_orbit(eph, t).position;
  if (!earth_rotation) return inertial;
  return Eigen::AngleAxisd(-constants::kEarthRotationRate * t, Vec3::UnitZ()) * inertial;
}

/// Look angles of a line-of-sight vector already expressed in ENU.
inline AzimuthElevation look_angles(const Vec3& enu) {
  const double horizontal = std::hypot(enu.x(), enu.y());
  AzimuthElevation out;
  out.elevation = std::atan2(enu.z(), horizontal);
  if (horizontal == 0.0) return out;  // zenith/nadir: azimuth is 0 by convention
  double az = std::atan2(enu.x(), enu.y());
  if (az < 0.0) az += 2.0 * constants::kPi;
  if (az >= 2.0 * constants::kPi) az = 0.0;
  out.azimuth = az;
  return out;
}

/// Azimuth/elevation of a satellite seen from a receiver, in the receiver's
/// own ENU frame.
inline AzimuthElevation azimuth_elevation(const Vec3& satellite_ecef, const Geodetic& receiver) {
  return look_angles(ecef_to_local(satellite_ecef, receiver));
}

/// Places each satellite at its nominal range along (azimuth, elevation) from
/// the receiver, with angles taken in the local frame of `origin`.
inline std::vector<SatelliteState> fixed_constellation(std::span<const FixedSatellite> sats,
                                                       const Vec3& receiver_local,
                                                       const GeodeticOrigin& origin = {}) {
  std::vector<SatelliteState> out;
  out.reserve(sats.size());
  for (const auto& s : sats) {
    if (!(s.elevation >= 0.0 && s.elevation <= constants::kPi / 2.0)) {
      throw std::invalid_argument("PRN " + std::to_string(s.prn) + ": elevation outside [0, pi/2]");
    }
    if (!(s.nominal_range > 0.0)) {
      throw std::invalid_argument("PRN " + std::to_string(s.prn) + ": nominal range must be > 0");
    }
    const double ce = std::cos(s.elevation);
    const Vec3 dir(std::sin(s.azimuth) * ce, std::cos(s.azimuth) * ce, std::sin(s.elevation));
    SatelliteState st;
    st.prn = s.prn;
    st.position_local = receiver_local + s.nominal_range * dir;
    st.position_ecef = local_to_ecef(st.position_local, origin);
    const auto angles = look_angles(st.position_local - receiver_local);
    st.azimuth = angles.azimuth;
    st.elevation = angles.elevation;
    out.push_back(st);
  }
  return out;
}

/// Propagates every ephemeris to time t and expresses the result relative to
/// a receiver given in the local frame of `origin`.
inline std::vector<SatelliteState> ephemeris_constellation(std::span<const KeplerianEphemeris> ephs,
                                                           double t, bool earth_rotation,
                                                           const Vec3& receiver_local,
                                                           const GeodeticOrigin& origin) {
  std::vector<SatelliteState> out;
  out.reserve(ephs.size());
  for (const auto& eph : ephs) {
    SatelliteState st;
    st.prn = eph.prn;
    st.position_ecef = propagate_kepler(eph, t, earth_rotation);
    st.position_local = ecef_to_local(st.position_ecef, origin);
    const auto angles = look_angles(st.position_local - receiver_local);
    st.azimuth = angles.azimuth;
    st.elevation = angles.elevation;
    out.push_back(st);
  }
  return out;
}

inline KeplerianEphemeris ephemeris_from_json(const nlohmann::json& j) {
  KeplerianEphemeris e;
  e.prn = j.at("prn").get<int>();
  e.semi_major_axis = j.at("semi_major_axis_m").get<double>();
  e.eccentricity = j.at("eccentricity").get<double>();
  e.inclination = j.at("inclination_rad").get<double>();
  e.raan = j.at("raan_rad").get<double>();
  e.arg_perigee = j.at("arg_perigee_rad").get<double>();
  e.mean_anomaly = j.at("mean_anomaly_rad").get<double>();
  e.epoch = j.value("epoch_s", 0.0);
  e.validate();
  return e;
}

inline nlohmann::json to_json(const KeplerianEphemeris& e) {
  return {{"prn", e.prn},
          {"semi_major_axis_m", e.semi_major_axis},
          {"eccentricity", e.eccentricity},
          {"inclination_rad", e.inclination},
          {"raan_rad", e.raan},
          {"arg_perigee_rad", e.arg_perigee},
          {"mean_anomaly_rad", e.mean_anomaly},
          {"epoch_s", e.epoch}};
}

/// Reads `{"satellites": [ {prn, semi_major_axis_m, ...}, ... ]}`.
inline std::vector<KeplerianEphemeris> load_ephemeris(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ephemeris file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
    std::vector<KeplerianEphemeris> out;
    for (const auto& j : doc.at("satellites")) out.push_back(ephemeris_from_json(j));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("invalid ephemeris file '" + path.string() + "': " + e.what());
  }
}

}  // namespace urbangnss
