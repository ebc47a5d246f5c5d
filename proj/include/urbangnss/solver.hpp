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
/// Pseudorange positioning and dilution of precision.
///
/// The state is (x, y, z, b) with b = c0 * dt in metres. Each iteration
/// linearises the pseudorange model at the current estimate,
///
///   A_i = [ (x_i - x)/rho_i, (y_i - y)/rho_i, (z_i - z)/rho_i, -1 ],
///   dP_i = P_i - (rho_i + b),
///
/// and solves min |A dx - dP| with a column-pivoted Householder QR. Because
/// A's first three columns point from the receiver to the satellites, the
/// correction is applied as estimate -= dx.

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "urbangnss/channel.hpp"

namespace urbangnss {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientSatellites : public SolverError {
 public:
  explicit InsufficientSatellites(std::size_t n)
      : SolverError("at least 4 usable measurements are required, got " + std::to_string(n)) {}
};

class SingularGeometry : public SolverError {
 public:
  SingularGeometry() : SolverError("satellite geometry is rank deficient") {}
};

struct SolverConfig {
  double epsilon = 1e-6;  // threshold on |dx| [m]
  int max_iterations = 20;

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("solver epsilon must be positive");
    if (max_iterations < 1) throw std::invalid_argument("solver max_iterations must be >= 1");
  }
};

struct RangeObservation {
  Vec3 satellite = Vec3::Zero();
  double pseudorange = 0.0;
};

using GeometryMatrix = Eigen::Matrix<double, Eigen::Dynamic, 4>;

struct SolverWorkspace {
  GeometryMatrix a;
  Eigen::VectorXd delta_p;
  Eigen::Vector4d delta_x = Eigen::Vector4d::Zero();
  std::size_t n = 0;
};

struct FixSolution {
  Vec3 position = Vec3::Zero();
  double clock_bias = 0.0;  // [s]
  int iterations = 0;
  bool converged = false;
  double residual_norm = 0.0;  // |P - model| at the returned estimate [m]
  SolverWorkspace last_step;   // final linearisation and its solution
};

inline constexpr std::size_t kMinimumSatellites = 4;

/// Keeps the measurements that carry a pseudorange.
inline std::vector<RangeObservation> usable_observations(
    std::span<const PseudorangeMeasurement> measurements) {
  std::vector<RangeObservation> out;
  for (const auto& m : measurements) {
    if (is_usable(m.visibility) && m.pseudorange) out.push_back({m.satellite_position, *m.pseudorange});
  }
  return out;
}

inline GeometryMatrix geometry_matrix(std::span<const Vec3> satellites, const Vec3& receiver) {
  GeometryMatrix a(static_cast<Eigen::Index>(satellites.size()), 4);
  for (std::size_t i = 0; i < satellites.size(); ++i) {
    const Vec3 los = satellites[i] - receiver;
    const double rho = los.norm();
    if (!(rho > 0.0)) throw SingularGeometry();
    const auto row = static_cast<Eigen::Index>(i);
    a.block<1, 3>(row, 0) = (los / rho).transpose();
    a(row, 3) = -1.0;
  }
  return a;
}

namespace detail {

inline Eigen::ColPivHouseholderQR<GeometryMatrix> factorize(const GeometryMatrix& a) {
  Eigen::ColPivHouseholderQR<GeometryMatrix> qr;
  qr.setThreshold(1e-10);
  qr.compute(a);
  if (qr.rank() < 4) throw SingularGeometry();
  return qr;
}

inline double modeled_residual_norm(std::span<const RangeObservation> obs, const Vec3& x, double b) {
  double sum = 0.0;
  for (const auto& o : obs) {
    const double r = o.pseudorange - ((o.satellite - x).norm() + b);
    sum += r * r;
  }
  return std::sqrt(sum);
}

}  // namespace detail

/// Linearises the pseudorange model at (position, clock_m) and solves the
/// least-squares correction.
inline SolverWorkspace linearized_step(std::span<const RangeObservation> obs, const Vec3& position,
                                       double clock_m) {
  SolverWorkspace ws;
  ws.n = obs.size();
  std::vector<Vec3> sats;
  sats.reserve(obs.size());
  for (const auto& o : obs) sats.push_back(o.satellite);
  ws.a = geometry_matrix(sats, position);
  ws.delta_p.resize(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    ws.delta_p[static_cast<Eigen::Index>(i)] =
        obs[i].pseudorange - ((obs[i].satellite - position).norm() + clock_m);
  }
  ws.delta_x = detail::factorize(ws.a).solve(ws.delta_p);
  return ws;
}

/// Iterative least-squares fix. Throws InsufficientSatellites or
/// SingularGeometry; running out of iterations is reported through
/// `converged == false`.
inline FixSolution solve_position(std::span<const RangeObservation> obs, const Vec3& initial_position,
                                  double initial_clock_s = 0.0, const SolverConfig& cfg = {}) {
  cfg.validate();
  if (obs.size() < kMinimumSatellites) throw InsufficientSatellites(obs.size());

  FixSolution fix;
  Vec3 x = initial_position;
  double b = constants::kSpeedOfLight * initial_clock_s;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    fix.last_step = linearized_step(obs, x, b);
    const Eigen::Vector4d& dx = fix.last_step.delta_x;
    x -= dx.head<3>();
    b -= dx[3];
    fix.iterations = it;
    if (!dx.allFinite()) break;
    if (dx.norm() < cfg.epsilon) {
      fix.converged = true;
      break;
    }
  }
  fix.position = x;
  fix.clock_bias = b / constants::kSpeedOfLight;
  fix.residual_norm = detail::modeled_residual_norm(obs, x, b);
  return fix;
}

inline FixSolution solve_position(std::span<const PseudorangeMeasurement> measurements,
                                  const Vec3& initial_position, double initial_clock_s,
                                  const SolverConfig& cfg) {
  const auto obs = usable_observations(measurements);
  return solve_position(std::span<const RangeObservation>(obs), initial_position, initial_clock_s, cfg);
}

// ---------------------------------------------------------------------------
// Dilution of precision

enum class DopRating { Ideal, Excellent, Good, Moderate, Fair, Poor };

inline std::string_view to_string(DopRating r) {
  switch (r) {
    case DopRating::Ideal: return "Ideal";
    case DopRating::Excellent: return "Excellent";
    case DopRating::Good: return "Good";
    case DopRating::Moderate: return "Moderate";
    case DopRating::Fair: return "Fair";
    case DopRating::Poor: return "Poor";
  }
  return "Unknown";
}

/// Rating bins with inclusive lower and exclusive upper bounds:
/// [0,1) Ideal, [1,2) Excellent, [2,5) Good, [5,10) Moderate, [10,20) Fair,
/// [20,inf) Poor. NaN is rated Poor.
inline DopRating classify_dop(double value) {
  if (value < 0.0) throw std::invalid_argument("DOP value must be non-negative");
  if (value < 1.0) return DopRating::Ideal;
  if (value < 2.0) return DopRating::Excellent;
  if (value < 5.0) return DopRating::Good;
  if (value < 10.0) return DopRating::Moderate;
  if (value < 20.0) return DopRating::Fair;
  return DopRating::Poor;
}

struct DopComponents {
  double gdop = 0.0;
  double pdop = 0.0;
  double hdop = 0.0;
  double vdop = 0.0;
  double tdop = 0.0;
  double sigma = 1.0;  // a-priori pseudorange sigma [m]
  DopRating rating = DopRating::Ideal;
  Eigen::Matrix4d cofactor = Eigen::Matrix4d::Zero();  // D = (A^T A)^-1 in the solver frame

  /// Expected overall error, sigma_G = GDOP * sigma.
  double sigma_g() const { return gdop * sigma; }
  /// Covariance Q = D sigma^2.
  Eigen::Matrix4d covariance() const { return cofactor * sigma * sigma; }
};

/// D = (A^T A)^-1 through the QR factors: with A P = Q R,
/// D = P R^-1 R^-T P^T.
inline Eigen::Matrix4d dop_cofactor(const GeometryMatrix& a) {
  const auto qr = detail::factorize(a);
  const Eigen::Matrix4d r = qr.matrixR().topLeftCorner<4, 4>().template triangularView<Eigen::Upper>();
  const Eigen::Matrix4d r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::Matrix4d::Identity());
  const Eigen::Matrix4d p = qr.colsPermutation();
  return p * (r_inv * r_inv.transpose()) * p.transpose();
}

/// DOP at `receiver`. `to_enu` rotates the solver frame into the receiver's
/// local east-north-up frame before HDOP/VDOP are read off; pass identity when
/// the solver already works in that frame.
inline DopComponents compute_dop(std::span<const Vec3> satellites, const Vec3& receiver,
                                 double sigma = 1.0,
                                 const Eigen::Matrix3d& to_enu = Eigen::Matrix3d::Identity()) {
  if (satellites.size() < kMinimumSatellites) throw InsufficientSatellites(satellites.size());
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  DopComponents dop;
  dop.sigma = sigma;
  dop.cofactor = dop_cofactor(geometry_matrix(satellites, receiver));
  const Eigen::Matrix3d pos_enu = to_enu * dop.cofactor.topLeftCorner<3, 3>() * to_enu.transpose();
  const double h2 = pos_enu(0, 0) + pos_enu(1, 1);
  const double v2 = pos_enu(2, 2);
  const double t2 = dop.cofactor(3, 3);
  dop.hdop = std::sqrt(h2);
  dop.vdop = std::sqrt(v2);
  dop.pdop = std::sqrt(h2 + v2);
  dop.tdop = std::sqrt(t2);
  dop.gdop = std::sqrt(h2 + v2 + t2);
  dop.rating = classify_dop(dop.gdop);
  return dop;
}

}  // namespace urbangnss
