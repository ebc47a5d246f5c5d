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
/// Measurement channel: turns ray-cast geometry into pseudoranges.
///
/// Per satellite and epoch:
///   1. below the elevation mask -> BelowMask, nothing else is computed;
///   2. LOS and mirror rays are cast and classified;
///   3. a Multipath satellite gets the offset m = r_ref (1 + sin(pi/2 - 2 theta));
///   4. the pseudorange is rho + m + c0 dt + e, with e from a per-PRN
///      Ornstein-Uhlenbeck channel.
/// Blocked satellites produce no pseudorange.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "urbangnss/raycast.hpp"
#include "urbangnss/satellites.hpp"

namespace urbangnss {

enum class Visibility : std::uint8_t { LosClear, Multipath, Blocked, BelowMask };

inline std::string_view to_string(Visibility v) {
  switch (v) {
    case Visibility::LosClear: return "LOS_CLEAR";
    case Visibility::Multipath: return "MULTIPATH";
    case Visibility::Blocked: return "BLOCKED";
    case Visibility::BelowMask: return "BELOW_MASK";
  }
  return "UNKNOWN";
}

inline bool is_usable(Visibility v) {
  return v == Visibility::LosClear || v == Visibility::Multipath;
}

/// Decision table over the two ranges: an unobstructed LOS is clear, an
/// obstructed LOS with a reflector behind the receiver is multipath, and an
/// obstructed LOS without one is blocked.
inline Visibility classify_visibility(const RayPairResult& pair, double max_range) {
  if (!(pair.r_los < max_range)) return Visibility::LosClear;
  if (pair.r_ref < max_range) return Visibility::Multipath;
  return Visibility::Blocked;
}

struct MultipathGeometry {
  double d = 0.0;      // extra path before reflection (mirror-ray range)
  double l = 0.0;      // extra path after reflection
  double alpha = 0.0;  // reflected ray vs. surface normal
  double theta = 0.0;  // satellite elevation
  double m = 0.0;      // total offset d + l
};

inline MultipathGeometry multipath_geometry(double r_ref, double theta) {
  if (!(r_ref >= 0.0)) throw std::invalid_argument("mirror range must be non-negative");
  if (!(theta >= 0.0 && theta <= constants::kPi / 2.0)) {
    throw std::invalid_argument("elevation must lie in [0, pi/2]");
  }
  MultipathGeometry g;
  g.d = r_ref;
  g.theta = theta;
  g.alpha = constants::kPi / 2.0 - 2.0 * theta;
  g.l = r_ref * std::sin(g.alpha);
  g.m = std::max(0.0, g.d + g.l);
  return g;
}

inline double multipath_offset(double r_ref, double theta) {
  return multipath_geometry(r_ref, theta).m;
}

inline double generate_pseudorange(double rho, double multipath, double clock_bias_s, double noise) {
  return rho + multipath + constants::kSpeedOfLight * clock_bias_s + noise;
}

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck noise

struct OuNoiseConfig {
  bool enabled = true;
  double theta = 0.5;  // mean reversion [1/s]
  double mu = 0.0;     // long-run mean [m]
  double sigma = 0.5;  // diffusion [m/sqrt(s)]
  double dt = 1.0;     // step [s]
  std::uint64_t seed = 0;

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("noise dt must be positive");
    if (!(theta >= 0.0)) throw std::invalid_argument("noise theta must be >= 0");
    if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
    if (!std::isfinite(mu)) throw std::invalid_argument("noise mu must be finite");
  }
};

struct OuNoiseState {
  double value = 0.0;
  std::mt19937_64 rng;
  std::normal_distribution<double> normal;

  OuNoiseState() = default;
  OuNoiseState(double x0, std::uint64_t seed) : value(x0), rng(seed) {}
};

/// Exact conditional-Gaussian update of the OU process over one step:
///   x' = mu + (x - mu) e^{-theta dt} + sigma sqrt((1 - e^{-2 theta dt}) / (2 theta)) z
/// which reduces to a random walk x' = x + sigma sqrt(dt) z at theta = 0.
inline void ou_advance(OuNoiseState& state, const OuNoiseConfig& cfg) {
  const double z = state.normal(state.rng);
  if (cfg.theta == 0.0) {
    state.value += cfg.sigma * std::sqrt(cfg.dt) * z;
    return;
  }
  const double decay = std::exp(-cfg.theta * cfg.dt);
  const double scale = cfg.sigma * std::sqrt(-std::expm1(-2.0 * cfg.theta * cfg.dt) / (2.0 * cfg.theta));
  state.value = cfg.mu + (state.value - cfg.mu) * decay + scale * z;
}

inline OuNoiseState ou_step(OuNoiseState state, const OuNoiseConfig& cfg) {
  ou_advance(state, cfg);
  return state;
}

/// SplitMix64 finaliser; used to derive independent seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using NoiseBank = std::map<int, OuNoiseState>;

/// One channel per PRN, each starting at mu with a seed derived from
/// (master seed, PRN).
inline NoiseBank make_noise_bank(std::span<const int> prns, const OuNoiseConfig& cfg) {
  NoiseBank bank;
  for (const int prn : prns) {
    bank.emplace(prn, OuNoiseState(cfg.mu, mix_seed(cfg.seed, static_cast<std::uint64_t>(prn))));
  }
  return bank;
}

// ---------------------------------------------------------------------------
// Epoch assembly

struct ReceiverConfig {
  double elevation_mask = 10.0 * constants::kDegToRad;
  double max_range = kDefaultMaxRange;
  double clock_bias = 0.0;         // [s]
  double pseudorange_sigma = 1.0;  // a-priori sigma for DOP scaling [m]
  OuNoiseConfig noise;

  void validate() const {
    if (!(elevation_mask >= 0.0 && elevation_mask < constants::kPi / 2.0)) {
      throw std::invalid_argument("elevation mask must lie in [0, pi/2)");
    }
    if (!(max_range > 0.0)) throw std::invalid_argument("max_range must be positive");
    if (!std::isfinite(clock_bias)) throw std::invalid_argument("clock bias must be finite");
    if (!(pseudorange_sigma > 0.0)) throw std::invalid_argument("pseudorange sigma must be positive");
    noise.validate();
  }
};

struct PseudorangeMeasurement {
  int prn = 0;
  Vec3 satellite_position = Vec3::Zero();  // local frame
  double azimuth = 0.0;
  double elevation = 0.0;
  double true_range = 0.0;
  double multipath_offset = 0.0;
  double noise = 0.0;
  double clock_term = 0.0;  // c0 * dt [m]
  std::optional<double> pseudorange;  // only for usable satellites
  Visibility visibility = Visibility::BelowMask;
  RayPairResult rays;
};

/// Builds one epoch of measurements. Every PRN's noise channel advances once
/// per call regardless of visibility, so the noise sequence depends only on
/// time and seed. noise_states must hold an entry for every PRN in sats.
template <RayCaster Caster>
std::vector<PseudorangeMeasurement> epoch_measurements(const Caster& caster,
                                                       std::span<const SatelliteState> sats,
                                                       const Vec3& receiver_truth,
                                                       const ReceiverConfig& cfg,
                                                       NoiseBank& noise_states) {
  std::vector<PseudorangeMeasurement> out;
  out.reserve(sats.size());
  for (const auto& sat : sats) {
    auto it = noise_states.find(sat.prn);
    if (it == noise_states.end()) {
      throw std::invalid_argument("no noise channel for PRN " + std::to_string(sat.prn));
    }
    ou_advance(it->second, cfg.noise);

    PseudorangeMeasurement m;
    m.prn = sat.prn;
    m.satellite_position = sat.position_local;
    m.azimuth = sat.azimuth;
    m.elevation = sat.elevation;
    m.true_range = (sat.position_local - receiver_truth).norm();
    m.clock_term = constants::kSpeedOfLight * cfg.clock_bias;
    m.rays.r_los = m.rays.r_ref = cfg.max_range;

    if (!(sat.elevation > cfg.elevation_mask)) {
      m.visibility = Visibility::BelowMask;
      out.push_back(m);
      continue;
    }
    m.rays = cast_satellite_rays(caster, receiver_truth, sat.azimuth, sat.elevation, cfg.max_range);
    m.visibility = classify_visibility(m.rays, cfg.max_range);
    if (m.visibility == Visibility::Multipath) {
      m.multipath_offset = multipath_offset(m.rays.r_ref, sat.elevation);
    }
    if (is_usable(m.visibility)) {
      m.noise = cfg.noise.enabled ? it->second.value : 0.0;
      m.pseudorange = generate_pseudorange(m.true_range, m.multipath_offset, cfg.clock_bias, m.noise);
    }
    out.push_back(m);
  }
  return out;
}

inline std::vector<PseudorangeMeasurement> epoch_measurements(const CityModel& model,
                                                              std::span<const SatelliteState> sats,
                                                              const Vec3& receiver_truth,
                                                              const ReceiverConfig& cfg,
                                                              NoiseBank& noise_states) {
  return epoch_measurements(BruteForceCaster(model), sats, receiver_truth, cfg, noise_states);
}

}  // namespace urbangnss
