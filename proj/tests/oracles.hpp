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

// Reference implementations used only by tests. Each one takes a different
// route from the library code it checks: cofactor expansion instead of QR,
// explicit elementary rotations instead of the ENU basis vectors, slab
// clipping instead of per-wall solves, plain bisection instead of Newton,
// and finite-difference Gauss-Newton instead of the analytic Jacobian.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Frozen reference values, computed offline at 50 significant digits.
inline constexpr double kKeplerE_M1_e03 = 1.2880913132118377;
inline constexpr double kNorthOffset1e5DegEquator = 1.1057427582159381;
inline constexpr double kMultipath100_078 = 101.07961170582674;
inline constexpr double kRlosCanyon = 10.467516015380857;  // 10 / cos 0.3
inline constexpr double kRrefCanyon = 5.233758007690429;   // 5 / cos 0.3
inline constexpr double kPseudorangeExample = 20000315.092458;

inline constexpr double kPi = 3.14159265358979323846;

// Azimuths and elevations of the eight-satellite configuration listing.
inline constexpr std::array<double, 8> kEightSatAzimuth{2.93, 3.39, 5.56, 0.23, 4.02, 1.38, 2.23, 0.65};
inline constexpr std::array<double, 8> kEightSatElevation{0.78, 0.32, 1.02, 0.90, 0.47, 0.26, 1.09, 0.38};

// --- linear algebra --------------------------------------------------------

inline double det3(const Eigen::Matrix4d& m, int skip_row, int skip_col) {
  std::array<std::array<double, 3>, 3> s{};
  for (int r = 0, rr = 0; r < 4; ++r) {
    if (r == skip_row) continue;
    for (int c = 0, cc = 0; c < 4; ++c) {
      if (c == skip_col) continue;
      s[rr][cc++] = m(r, c);
    }
    ++rr;
  }
  return s[0][0] * (s[1][1] * s[2][2] - s[1][2] * s[2][1]) -
         s[0][1] * (s[1][0] * s[2][2] - s[1][2] * s[2][0]) +
         s[0][2] * (s[1][0] * s[2][1] - s[1][1] * s[2][0]);
}

// Adjugate over determinant.
inline Eigen::Matrix4d cofactor_inverse(const Eigen::Matrix4d& m) {
  Eigen::Matrix4d cof;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) cof(r, c) = (((r + c) % 2) ? -1.0 : 1.0) * det3(m, r, c);
  }
  double det = 0.0;
  for (int c = 0; c < 4; ++c) det += m(0, c) * cof(0, c);
  return cof.transpose() / det;
}

// D = (A^T A)^-1 with A rows [(s - x)/|s - x|, -1].
inline Eigen::Matrix4d dop_cofactor(const std::vector<Eigen::Vector3d>& sats, const Eigen::Vector3d& x) {
  Eigen::Matrix4d ata = Eigen::Matrix4d::Zero();
  for (const auto& s : sats) {
    Eigen::Vector4d row;
    const Eigen::Vector3d u = (s - x) / (s - x).norm();
    row << u, -1.0;
    ata += row * row.transpose();
  }
  return cofactor_inverse(ata);
}

// --- geodesy ---------------------------------------------------------------

inline Eigen::Vector3d geodetic_to_ecef(double lat, double lon, double h) {
  const double a = 6378137.0;
  const double f = 1.0 / 298.257223563;
  const double e2 = f * (2.0 - f);
  const double n = a / std::sqrt(1.0 - e2 * std::sin(lat) * std::sin(lat));
  return {(n + h) * std::cos(lat) * std::cos(lon), (n + h) * std::cos(lat) * std::sin(lon),
          (n * (1.0 - e2) + h) * std::sin(lat)};
}

inline Eigen::Matrix3d rot_x(double a) {
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, std::cos(a), std::sin(a), 0, -std::sin(a), std::cos(a);
  return r;
}

inline Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), std::sin(a), 0, -std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

// ECEF -> ENU as R1(pi/2 - lat) R3(pi/2 + lon).
inline Eigen::Matrix3d enu_rotation(double lat, double lon) {
  return rot_x(kPi / 2.0 - lat) * rot_z(kPi / 2.0 + lon);
}

inline Eigen::Vector3d ecef_to_enu(const Eigen::Vector3d& p, double lat, double lon, double h) {
  return enu_rotation(lat, lon) * (p - geodetic_to_ecef(lat, lon, h));
}

// --- Kepler ----------------------------------------------------------------

inline double kepler_bisection(double m, double e) {
  long double lo = static_cast<long double>(m) - 1.0L;
  long double hi = static_cast<long double>(m) + 1.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    const long double f = mid - static_cast<long double>(e) * std::sin(mid) - m;
    (f > 0 ? hi : lo) = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

// --- ray vs axis-aligned box (slab clipping) -------------------------------

struct Box {
  double x0, y0, x1, y1, height;
};

// Entry distance of the ray into the box [x0,x1]x[y0,y1]x[0,height], or
// nothing. Origins inside the box are not expected.
inline std::optional<double> slab_hit(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const Box& b) {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  const double lo[3] = {b.x0, b.y0, 0.0};
  const double hi[3] = {b.x1, b.y1, b.height};
  for (int k = 0; k < 3; ++k) {
    if (d[k] == 0.0) {
      if (o[k] < lo[k] || o[k] > hi[k]) return std::nullopt;
      continue;
    }
    double a = (lo[k] - o[k]) / d[k];
    double c = (hi[k] - o[k]) / d[k];
    if (a > c) std::swap(a, c);
    t0 = std::max(t0, a);
    t1 = std::min(t1, c);
  }
  if (t0 > t1) return std::nullopt;
  return t0;
}

inline Eigen::Vector3d direction(double az, double el) {
  return {std::sin(az) * std::cos(el), std::cos(az) * std::cos(el), std::sin(el)};
}

// Nearest entry over several boxes, limited to max_range.
inline std::optional<double> boxes_hit(const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                                       const std::vector<Box>& boxes, double max_range) {
  std::optional<double> best;
  for (const auto& b : boxes) {
    const auto t = slab_hit(o, d, b);
    if (t && *t < max_range && (!best || *t < *best)) best = t;
  }
  return best;
}

// --- nonlinear least squares -----------------------------------------------

// Gauss-Newton on (x, y, z, b) with a central-difference Jacobian and the
// normal equations inverted by cofactors.
inline Eigen::Vector4d nls_fix(const std::vector<Eigen::Vector3d>& sats, const std::vector<double>& p,
                               Eigen::Vector4d x) {
  const auto residuals = [&](const Eigen::Vector4d& s) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(sats.size()));
    for (std::size_t i = 0; i < sats.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] = (sats[i] - s.head<3>()).norm() + s[3] - p[i];
    }
    return r;
  };
  for (int it = 0; it < 50; ++it) {
    const Eigen::VectorXd r = residuals(x);
    Eigen::MatrixXd j(r.size(), 4);
    for (int k = 0; k < 4; ++k) {
      const double h = 1e-3;
      Eigen::Vector4d xp = x;
      Eigen::Vector4d xm = x;
      xp[k] += h;
      xm[k] -= h;
      j.col(k) = (residuals(xp) - residuals(xm)) / (2.0 * h);
    }
    const Eigen::Matrix4d jtj = j.transpose() * j;
    const Eigen::Vector4d step = cofactor_inverse(jtj) * (j.transpose() * r);
    x -= step;
    if (step.norm() < 1e-9) break;
  }
  return x;
}

// --- generators --------------------------------------------------------------

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  Eigen::Vector3d vec(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }

  // Satellites on a sphere of radius r around the origin, elevations spread
  // enough that the geometry is non-singular.
  std::vector<Eigen::Vector3d> constellation(int n, double r = 2.0e7) {
    std::vector<Eigen::Vector3d> out;
    for (int i = 0; i < n; ++i) {
      const double az = uniform(0.0, 2.0 * kPi);
      const double el = uniform(0.1, 1.5);
      out.push_back(r * direction(az, el));
    }
    return out;
  }
};

}  // namespace oracle
