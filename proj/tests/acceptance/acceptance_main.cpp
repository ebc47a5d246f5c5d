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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails or exceeds its time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "urbangnss.hpp"

namespace ug = urbangnss;

namespace {

const std::string kData = URBANGNSS_DATA_DIR;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

int g_failures = 0;

void criterion(const char* id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (out.ok && limit_s > 0.0 && elapsed >= limit_s) {
    out.ok = false;
    std::ostringstream os;
    os << "time limit " << limit_s << " s exceeded";
    out.detail = os.str();
  }
  if (!out.ok) ++g_failures;
  std::printf("%s %s: %s (%.3f s)%s%s\n", out.ok ? "PASS" : "FAIL", id, title, elapsed,
              out.detail.empty() ? "" : " - ", out.detail.c_str());
  std::fflush(stdout);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<ug::FixedSatellite> eight_sat_list() {
  std::vector<ug::FixedSatellite> list;
  for (int i = 0; i < 8; ++i) list.push_back({i + 1, oracle::kEightSatAzimuth[i], oracle::kEightSatElevation[i]});
  return list;
}

// Random convex prism: sorted angles around a centre, random radius.
ug::BuildingFootprint random_prism(oracle::Gen& gen, int id) {
  const double cx = gen.uniform(-500, 500);
  const double cy = gen.uniform(-500, 500);
  const int n = gen.integer(3, 8);
  std::vector<double> angles;
  for (int i = 0; i < n; ++i) angles.push_back(gen.uniform(0, 2 * oracle::kPi));
  std::sort(angles.begin(), angles.end());
  const double radius = gen.uniform(3, 30);
  ug::BuildingFootprint b;
  b.id = "p" + std::to_string(id);
  b.height = gen.uniform(3, 150);
  for (double a : angles) b.vertices.emplace_back(cx + radius * std::cos(a), cy + radius * std::sin(a));
  // Occasionally axis-aligned boxes, which produce exact ties on shared edges.
  if (gen.integer(0, 3) == 0) {
    b.vertices = {{cx, cy}, {cx + radius, cy}, {cx + radius, cy + radius}, {cx, cy + radius}};
  }
  return b;
}

bool same_hit(const std::optional<ug::RayHit>& a, const std::optional<ug::RayHit>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->building == b->building && a->face == b->face && std::abs(a->distance - b->distance) <= 1e-9;
}

Outcome ac1() {
  Outcome out;
  for (double d : {0.5, 1.0, 10.0, 37.25, 1234.5}) {
    out.require(ug::multipath_offset(d, oracle::kPi / 4.0) == d, "m(d, pi/4) != d");
    out.require(ug::multipath_offset(d, 0.0) == 2.0 * d, "m(d, 0) != 2d");
  }
  const double d = 25.0;
  const int n = 1000;
  const double step = (oracle::kPi / 2.0) / (n - 1);
  double prev = ug::multipath_offset(d, 0.0);
  for (int k = 1; k < n; ++k) {
    const double m = ug::multipath_offset(d, k * step);
    out.require(m <= prev, "not non-increasing at sample " + std::to_string(k));
    // |dm/dtheta| = 2 d |sin 2 theta| <= 2 d.
    out.require(prev - m <= 2.0 * d * step * (1.0 + 1e-9), "jump exceeds Lipschitz bound at " + std::to_string(k));
    prev = m;
  }
  out.require(std::abs(prev) < 1e-12, "m(d, pi/2) != 0");
  return out;
}

Outcome ac2() {
  Outcome out;
  oracle::Gen gen(2);
  ug::SolverConfig cfg;
  cfg.epsilon = 1e-6;
  int worst_iter = 0;
  double worst_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ug::Vec3 truth = gen.vec(-2000, 2000);
    const auto sats = ug::fixed_constellation(eight_sat_list(), truth);
    std::vector<ug::RangeObservation> obs;
    for (const auto& s : sats) obs.push_back({s.position_local, (s.position_local - truth).norm()});
    ug::Vec3 offset = gen.vec(-1, 1).normalized() * 1000.0;
    const auto fix = ug::solve_position(obs, truth + offset, 0.0, cfg);
    const double err = (fix.position - truth).norm();
    worst_err = std::max(worst_err, err);
    worst_iter = std::max(worst_iter, fix.iterations);
    out.require(fix.converged, "trial " + std::to_string(trial) + " did not converge");
    out.require(err < 1e-6, "trial " + std::to_string(trial) + " error " + std::to_string(err));
    out.require(fix.iterations <= 10, "trial " + std::to_string(trial) + " took " + std::to_string(fix.iterations));
  }
  if (out.ok) {
    std::ostringstream os;
    os << "max error " << worst_err << " m, max iterations " << worst_iter;
    out.detail = os.str();
  }
  return out;
}

double ata_condition(const std::vector<ug::Vec3>& sats, const ug::Vec3& rx) {
  Eigen::Matrix4d ata = Eigen::Matrix4d::Zero();
  for (const auto& s : sats) {
    Eigen::Vector4d row;
    row << (s - rx).normalized(), -1.0;
    ata += row * row.transpose();
  }
  const Eigen::Vector4d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(ata).eigenvalues();
  return ev.maxCoeff() / ev.minCoeff();
}

double cofactor_mismatch(const Eigen::Matrix4d& got, const Eigen::Matrix4d& want) {
  return (got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff();
}

Outcome ac3() {
  Outcome out;
  oracle::Gen gen(3);
  int done = 0;
  int compared = 0;
  double worst = 0.0;
  while (done < 1000) {
    const auto sats = gen.constellation(gen.integer(4, 12));
    const ug::Vec3 rx = gen.vec(-1000, 1000);
    ug::DopComponents d;
    try {
      d = ug::compute_dop(sats, rx, gen.uniform(0.5, 5.0));
    } catch (const ug::SingularGeometry&) {
      continue;
    }
    ++done;
    out.require(rel(d.pdop * d.pdop, d.hdop * d.hdop + d.vdop * d.vdop) <= 1e-9, "PDOP identity");
    out.require(rel(d.gdop * d.gdop, d.pdop * d.pdop + d.tdop * d.tdop) <= 1e-9, "GDOP identity");
    // Inversion error in both routes grows with cond(A^T A); the oracle match
    // is only meaningful where that product stays well below 1e-9 / eps.
    if (ata_condition(sats, rx) > 1e5) continue;
    ++compared;
    worst = std::max(worst, cofactor_mismatch(d.cofactor, oracle::dop_cofactor(sats, rx)));
  }
  const auto eight = ug::fixed_constellation(eight_sat_list(), ug::Vec3::Zero());
  std::vector<ug::Vec3> eight_pos;
  for (const auto& s : eight) eight_pos.push_back(s.position_local);
  const ug::Vec3 rx(3.0, -2.0, 1.5);
  const double eight_diff =
      cofactor_mismatch(ug::compute_dop(eight_pos, rx, 1.0).cofactor, oracle::dop_cofactor(eight_pos, rx));
  worst = std::max(worst, eight_diff);
  out.require(eight_diff <= 1e-9, "eight-satellite cofactor mismatch");
  out.require(worst <= 1e-9, "cofactor mismatch " + std::to_string(worst));
  out.require(compared >= 500, "too few well-conditioned geometries");
  if (out.ok) {
    std::ostringstream os;
    os << "1000 geometries, D compared on " << compared << " + eight-satellite set, max relative mismatch "
       << worst;
    out.detail = os.str();
  }
  return out;
}

Outcome ac4() {
  Outcome out;
  using R = ug::DopRating;
  const std::vector<std::pair<double, R>> table{{0.5, R::Ideal},  {1, R::Excellent}, {1.5, R::Excellent},
                                                {2, R::Good},     {3, R::Good},      {5, R::Moderate},
                                                {7, R::Moderate}, {10, R::Fair},     {15, R::Fair},
                                                {20, R::Poor},    {25, R::Poor}};
  for (const auto& [v, r] : table) {
    const auto got = ug::classify_dop(v);
    std::ostringstream os;
    os << v << " -> " << ug::to_string(got) << ", expected " << ug::to_string(r);
    out.require(got == r, os.str());
  }
  return out;
}

Outcome ac5() {
  Outcome out;
  oracle::Gen gen(5);
  std::vector<ug::BuildingFootprint> prisms;
  for (int i = 0; i < 200; ++i) {
    auto p = random_prism(gen, i);
    try {
      p = ug::normalize_footprint(p);
    } catch (const ug::CityModelError&) {
      --i;
      continue;
    }
    prisms.push_back(p);
  }
  const ug::CityModel model({}, prisms);
  const ug::GridIndex index(model);
  const ug::BruteForceCaster brute(model);

  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const ug::Vec3 o(gen.uniform(-600, 600), gen.uniform(-600, 600), gen.uniform(0, 160));
    const auto ray = ug::Ray::from_angles(o, gen.uniform(0, 2 * oracle::kPi), gen.uniform(-0.6, oracle::kPi / 2.0));
    const auto a = brute.cast(ray, 5000);
    const auto b = index.cast(ray, 5000);
    hits += a ? 1 : 0;
    out.require(same_hit(a, b), "random ray " + std::to_string(i) + " differs");
  }

  // Grazing set: along every wall plane, through every vertex, across roofs.
  int grazing = 0;
  for (std::size_t bi = 0; bi < 40; ++bi) {
    const auto& b = model.building(bi);
    const std::size_t n = b.vertices.size();
    for (std::size_t k = 0; k < n; ++k) {
      const ug::Vec2 a = b.vertices[k];
      const ug::Vec2 c = b.vertices[(k + 1) % n];
      const ug::Vec2 e = (c - a).normalized();
      for (double z : {0.0, 0.5 * b.height, b.height}) {
        const ug::Vec3 dir(e.x(), e.y(), 0.0);
        const ug::Vec3 start(a.x() - 20.0 * e.x(), a.y() - 20.0 * e.y(), z);
        const ug::Ray along(start, dir);
        out.require(same_hit(brute.cast(along, 5000), index.cast(along, 5000)), "grazing wall ray differs");
        const ug::Vec3 towards = ug::Vec3(a.x(), a.y(), z) - ug::Vec3(a.x() - 15.0, a.y() - 25.0, z);
        const ug::Ray corner(ug::Vec3(a.x() - 15.0, a.y() - 25.0, z), towards.normalized());
        out.require(same_hit(brute.cast(corner, 5000), index.cast(corner, 5000)), "vertex ray differs");
        grazing += 2;
      }
      const ug::Ray down(ug::Vec3(a.x(), a.y(), b.height + 10.0), ug::Vec3(0, 0, -1));
      out.require(same_hit(brute.cast(down, 5000), index.cast(down, 5000)), "vertical vertex ray differs");
      ++grazing;
    }
  }
  if (out.ok) {
    std::ostringstream os;
    os << "1000 random rays (" << hits << " hits), " << grazing << " grazing rays";
    out.detail = os.str();
  }
  return out;
}

Outcome ac6() {
  Outcome out;
  const double max = ug::kDefaultMaxRange;
  struct Case {
    double r_los, r_ref;
    ug::Visibility want;
  };
  const std::vector<Case> cases{{max, max, ug::Visibility::LosClear},
                                {max, 12.0, ug::Visibility::LosClear},
                                {30.0, 8.0, ug::Visibility::Multipath},
                                {30.0, max, ug::Visibility::Blocked}};
  for (const auto& c : cases) {
    const auto got = ug::classify_visibility({c.r_los, c.r_ref, {}, {}}, max);
    std::ostringstream os;
    os << "(" << c.r_los << ", " << c.r_ref << ") -> " << ug::to_string(got);
    out.require(got == c.want, os.str());
  }
  return out;
}

Outcome ac7() {
  Outcome out;
  ug::OuNoiseConfig decay;
  decay.theta = 1.0;
  decay.sigma = 0.0;
  decay.dt = std::log(2.0);
  out.require(ug::ou_step(ug::OuNoiseState(1.0, 1), decay).value == 0.5, "decay case is not exactly 0.5");

  ug::OuNoiseConfig cfg;
  cfg.theta = 0.5;
  cfg.sigma = 1.0;
  cfg.dt = 1.0;
  ug::OuNoiseState s(0.0, 7);
  double sum = 0.0;
  double sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    ug::ou_advance(s, cfg);
    sum += s.value;
    sum2 += s.value * s.value;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  const double want = cfg.sigma * cfg.sigma / (2.0 * cfg.theta);
  out.require(std::abs(var - want) <= 0.05 * want, "stationary variance " + std::to_string(var));

  ug::OuNoiseState a(0.0, 99);
  ug::OuNoiseState b(0.0, 99);
  for (int i = 0; i < 10000; ++i) {
    ug::ou_advance(a, cfg);
    ug::ou_advance(b, cfg);
    out.require(std::memcmp(&a.value, &b.value, sizeof(double)) == 0, "seeded streams differ");
  }
  if (out.ok) out.detail = "variance " + std::to_string(var) + " vs " + std::to_string(want);
  return out;
}

Outcome ac8() {
  Outcome out;
  oracle::Gen gen(8);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double m = gen.uniform(-50.0, 50.0);
    const double e = gen.uniform(0.0, 0.99);
    const double ea = ug::solve_kepler(m, e);
    const double r = std::abs(ea - e * std::sin(ea) - m);
    worst = std::max(worst, r);
    out.require(r < 1e-12, "Kepler residual " + std::to_string(r));
  }
  ug::KeplerianEphemeris eph;
  eph.semi_major_axis = 26560e3;
  eph.inclination = 0.96;
  eph.raan = 0.3;
  eph.arg_perigee = 1.2;
  eph.mean_anomaly = 0.7;
  const double period = eph.period();
  double worst_r = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double r = ug::propagate_kepler(eph, period * k / 1000.0, true).norm();
    worst_r = std::max(worst_r, rel(r, eph.semi_major_axis));
  }
  out.require(worst_r <= 1e-6, "radius drift " + std::to_string(worst_r));
  if (out.ok) {
    std::ostringstream os;
    os << "max residual " << worst << ", max radius drift " << worst_r;
    out.detail = os.str();
  }
  return out;
}

Outcome ac9() {
  Outcome out;
  const auto cfg = ug::load_scenario(kData + "/scenarios/canyon.json");
  const ug::Simulation city(cfg);
  const ug::Simulation open(cfg, ug::CityModel(city.model().origin(), {}));
  const auto with = ug::run_scenario(city);
  const auto without = ug::run_scenario(open);

  // (a) no-fix epochs exactly when fewer than four satellites are usable.
  int nofix = 0;
  for (const auto& r : with) {
    if (r.num_vis_sat < 4) {
      ++nofix;
      out.require(!r.has_fix() && r.status == ug::FixStatus::InsufficientSatellites, "fix despite < 4 usable");
    }
  }
  out.require(nofix > 0, "no epoch lost its fix");

  // (b) larger mean error with reflectors, over the epochs where both fix.
  double err_city = 0.0;
  double err_open = 0.0;
  int both = 0;
  for (std::size_t k = 0; k < with.size(); ++k) {
    if (with[k].fix_error && without[k].fix_error && with[k].num_vis_sat < 8) {
      err_city += *with[k].fix_error;
      err_open += *without[k].fix_error;
      ++both;
    }
  }
  out.require(both > 0, "no epochs with multipath fixes");
  err_city /= std::max(both, 1);
  err_open /= std::max(both, 1);
  out.require(err_city > err_open, "mean error with reflectors is not larger");

  // (c) blocked PRNs against slab clipping of the two blocks.
  const std::vector<oracle::Box> blocks{{5, -250, 15, 250, 40}, {-25, 0, -15, 250, 60}};
  for (const auto& r : with) {
    std::vector<int> want;
    for (int i = 0; i < 8; ++i) {
      const double az = oracle::kEightSatAzimuth[i];
      const double el = oracle::kEightSatElevation[i];
      if (!(el > cfg.receiver.elevation_mask)) continue;
      const bool los = oracle::boxes_hit(r.truth, oracle::direction(az, el), blocks, cfg.receiver.max_range).has_value();
      const bool ref =
          oracle::boxes_hit(r.truth, oracle::direction(az + oracle::kPi, el), blocks, cfg.receiver.max_range).has_value();
      if (los && !ref) want.push_back(i + 1);
    }
    out.require(r.sats_blocked == want, "blocked list mismatch at t=" + std::to_string(r.timestamp));
  }
  if (out.ok) {
    std::ostringstream os;
    os << nofix << " no-fix epochs; mean error " << err_city << " m vs " << err_open << " m over " << both
       << " epochs";
    out.detail = os.str();
  }
  return out;
}

Outcome ac10() {
  Outcome out;
  const ug::Simulation sim(ug::load_scenario(kData + "/scenarios/canyon.json"));
  ug::HeatmapSpec spec;
  spec.east_min = -100;
  spec.north_min = -100;
  spec.east_max = 100;
  spec.north_max = 100;
  spec.cell_size = 10;
  spec.altitude = 15;
  spec.epochs_per_cell = 5;
  out.require(spec.rows() == 20 && spec.columns() == 20, "grid is not 20 x 20");

  const unsigned n = std::max(4u, std::thread::hardware_concurrency());
  std::ostringstream serial;
  std::ostringstream parallel;
  ug::write_heatmap_csv(ug::generate_heatmap(sim, spec, 1), serial);
  ug::write_heatmap_csv(ug::generate_heatmap(sim, spec, n), parallel);
  out.require(!serial.str().empty() && serial.str() == parallel.str(), "grids differ between 1 and N workers");
  if (out.ok) out.detail = "1 vs " + std::to_string(n) + " workers, " + std::to_string(serial.str().size()) + " bytes";
  return out;
}

}  // namespace

int main() {
  criterion("AC1", "multipath offset special cases and monotone sweep", 1.0, ac1);
  criterion("AC2", "exact-data localization, 100 truths", 5.0, ac2);
  criterion("AC3", "DOP identities and cofactor oracle", 5.0, ac3);
  criterion("AC4", "DOP rating table probes", 0.0, ac4);
  criterion("AC5", "grid index equals brute force", 10.0, ac5);
  criterion("AC6", "visibility decision table", 0.0, ac6);
  criterion("AC7", "OU noise decay, variance, reproducibility", 5.0, ac7);
  criterion("AC8", "Kepler residuals and radius conservation", 0.0, ac8);
  criterion("AC9", "canyon end-to-end", 10.0, ac9);
  criterion("AC10", "heat map worker invariance", 30.0, ac10);
  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
