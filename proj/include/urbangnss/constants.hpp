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
/// Physical and geodetic constants. Every module reads them from here.

#pragma once

#include <numbers>

namespace urbangnss::constants {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

/// Speed of light in vacuum [m/s].
inline constexpr double kSpeedOfLight = 299792458.0;

// WGS-84 ellipsoid.
inline constexpr double kWgs84A = 6378137.0;               // semi-major axis [m]
inline constexpr double kWgs84F = 1.0 / 298.257223563;     // flattening
inline constexpr double kWgs84E2 = kWgs84F * (2.0 - kWgs84F);  // first eccentricity squared

/// Earth gravitational parameter used for orbit propagation [m^3/s^2].
inline constexpr double kEarthMu = 3.986005e14;

/// Earth rotation rate [rad/s].
inline constexpr double kEarthRotationRate = 7.2921151467e-5;

}  // namespace urbangnss::constants
