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
/// Scenario configuration and the epoch loop.
///
/// A Simulation owns the loaded city model, its ray-cast index and the
/// satellite source. It is immutable once built, so one instance can serve
/// any number of threads (the heat-map generator relies on this). Mutable
/// per-run state is limited to the noise bank passed into simulate_epoch.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "urbangnss/channel.hpp"
#include "urbangnss/citymodel.hpp"
#include "urbangnss/raycast.hpp"
#include "urbangnss/satellites.hpp"
#include "urbangnss/solver.hpp"

namespace urbangnss {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Waypoint {
  double time = 0.0;
  Vec3 position = Vec3::Zero();  // local frame
};

struct FixedSource {
  std::vector<FixedSatellite> satellites;
};

struct EphemerisSource {
  std::filesystem::path file;
  bool earth_rotation = true;
};

using SatelliteSource = std::variant<FixedSource, EphemerisSource>;

enum class OutputFormat { JsonLines, Csv };

struct OutputSpec {
  std::filesystem::path path;
  OutputFormat format = OutputFormat::JsonLines;
};

struct ScenarioConfig {
  std::filesystem::path city_model;
  SatelliteSource satellites = FixedSource{};
  std::vector<Waypoint> trajectory;  // a single waypoint is a static receiver
  int epochs = 1;
  double dt = 1.0;
  double start_time = 0.0;
  ReceiverConfig receiver;
  SolverConfig solver;
  Vec3 initial_position = Vec3::Zero();
  double initial_clock_bias = 0.0;  // [s]
  std::uint64_t master_seed = 0;
  std::optional<OutputSpec> output;

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (trajectory.empty()) throw ConfigError("receiver position or trajectory is required");
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
      if (!(trajectory[i].time > trajectory[i - 1].time)) {
        throw ConfigError("trajectory timestamps must be strictly increasing");
      }
    }
    if (const auto* fixed = std::get_if<FixedSource>(&satellites)) {
      for (const auto& s : fixed->satellites) {
        if (!(s.elevation >= 0.0 && s.elevation <= constants::kPi / 2.0)) {
          throw ConfigError("satellite " + std::to_string(s.prn) + ": elevation outside [0, pi/2]");
        }
      }
    }
    try {
      receiver.validate();
      solver.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

OutputFormat output_format_for(const std::filesystem::path& path);

namespace detail {

inline Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected [east, north, up]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline std::vector<double> number_list(const nlohmann::json& j) {
  return j.get<std::vector<double>>();
}

}  // namespace detail

/// Parses a scenario document. Relative input paths resolve against
/// `base_dir`; the output path is taken as given.
/// The schema is described in docs/file-formats.md.
inline ScenarioConfig parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  ScenarioConfig cfg;
  try {
    cfg.city_model = detail::resolve(base_dir, doc.at("city_model").get<std::string>());

    const auto& sats = doc.at("satellites");
    const std::string mode = sats.value("mode", "fixed");
    if (mode == "fixed") {
      FixedSource src;
      const double range = sats.value("nominal_range_m", 2.0e7);
      if (sats.contains("azimuth_rad")) {
        // Parallel lists, the shape of a plugin's satAzimuth/satElevation.
        const auto az = detail::number_list(sats.at("azimuth_rad"));
        const auto el = detail::number_list(sats.at("elevation_rad"));
        if (az.size() != el.size()) throw ConfigError("azimuth and elevation lists differ in length");
        std::vector<int> prns(az.size());
        for (std::size_t i = 0; i < prns.size(); ++i) prns[i] = static_cast<int>(i) + 1;
        if (sats.contains("prn")) prns = sats.at("prn").get<std::vector<int>>();
        if (prns.size() != az.size()) throw ConfigError("prn list length mismatch");
        if (sats.contains("count") && sats.at("count").get<std::size_t>() != az.size()) {
          throw ConfigError("satellite count does not match the angle lists");
        }
        for (std::size_t i = 0; i < az.size(); ++i) src.satellites.push_back({prns[i], az[i], el[i], range});
      } else {
        for (const auto& s : sats.at("list")) {
          src.satellites.push_back({s.at("prn").get<int>(), s.at("azimuth_rad").get<double>(),
                                    s.at("elevation_rad").get<double>(),
                                    s.value("nominal_range_m", range)});
        }
      }
      cfg.satellites = std::move(src);
    } else if (mode == "ephemeris") {
      EphemerisSource src;
      src.file = detail::resolve(base_dir, sats.at("file").get<std::string>());
      src.earth_rotation = sats.value("earth_rotation", true);
      cfg.satellites = std::move(src);
    } else {
      throw ConfigError("unknown satellite mode '" + mode + "'");
    }

    const auto& rx = doc.at("receiver");
    if (rx.contains("trajectory")) {
      for (const auto& w : rx.at("trajectory")) {
        cfg.trajectory.push_back({w.at("t").get<double>(), detail::vec3_from_json(w.at("position"))});
      }
    } else {
      cfg.trajectory.push_back({0.0, detail::vec3_from_json(rx.at("position"))});
    }

    cfg.epochs = doc.value("epochs", 1);
    cfg.dt = doc.value("dt", 1.0);
    cfg.start_time = doc.value("start_time_s", 0.0);
    cfg.master_seed = doc.value("seed", std::uint64_t{0});

    if (doc.contains("receiver_config")) {
      const auto& rc = doc.at("receiver_config");
      cfg.receiver.elevation_mask = rc.value("elevation_mask_rad", cfg.receiver.elevation_mask);
      cfg.receiver.max_range = rc.value("max_range_m", cfg.receiver.max_range);
      cfg.receiver.clock_bias = rc.value("clock_bias_s", cfg.receiver.clock_bias);
      cfg.receiver.pseudorange_sigma = rc.value("pseudorange_sigma_m", cfg.receiver.pseudorange_sigma);
      if (rc.contains("noise")) {
        const auto& n = rc.at("noise");
        cfg.receiver.noise.enabled = n.value("enabled", true);
        cfg.receiver.noise.theta = n.value("theta", cfg.receiver.noise.theta);
        cfg.receiver.noise.mu = n.value("mu", cfg.receiver.noise.mu);
        cfg.receiver.noise.sigma = n.value("sigma", cfg.receiver.noise.sigma);
      }
    }
    if (doc.contains("solver")) {
      const auto& sc = doc.at("solver");
      cfg.solver.epsilon = sc.value("epsilon_m", cfg.solver.epsilon);
      cfg.solver.max_iterations = sc.value("max_iterations", cfg.solver.max_iterations);
    }
    if (doc.contains("initial_guess")) {
      const auto& ig = doc.at("initial_guess");
      if (ig.contains("position")) cfg.initial_position = detail::vec3_from_json(ig.at("position"));
      cfg.initial_clock_bias = ig.value("clock_bias_s", 0.0);
    }
    if (doc.contains("output")) {
      const auto& o = doc.at("output");
      OutputSpec out;
      out.path = o.at("path").get<std::string>();  // relative to the working directory
      const std::string fmt = o.value("format", "");
      if (fmt.empty()) {
        out.format = output_format_for(out.path);
      } else if (fmt == "jsonl") {
        out.format = OutputFormat::JsonLines;
      } else if (fmt == "csv") {
        out.format = OutputFormat::Csv;
      } else {
        throw ConfigError("unknown output format '" + fmt + "'");
      }
      cfg.output = out;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  cfg.receiver.noise.dt = cfg.dt;
  cfg.receiver.noise.seed = cfg.master_seed;
  cfg.validate();
  return cfg;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("parse error in '" + path.string() + "': " + e.what());
  }
  return parse_scenario(doc, path.parent_path());
}

inline OutputFormat output_format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? OutputFormat::Csv : OutputFormat::JsonLines;
}

/// Linear interpolation between waypoints, holding the end points outside
/// the covered time span.
inline Vec3 interpolate_trajectory(const std::vector<Waypoint>& traj, double t) {
  if (traj.empty()) throw std::invalid_argument("empty trajectory");
  if (traj.size() == 1 || t <= traj.front().time) return traj.front().position;
  if (t >= traj.back().time) return traj.back().position;
  const auto hi = std::upper_bound(traj.begin(), traj.end(), t,
                                   [](double v, const Waypoint& w) { return v < w.time; });
  const auto lo = hi - 1;
  const double u = (t - lo->time) / (hi->time - lo->time);
  return lo->position + u * (hi->position - lo->position);
}

// ---------------------------------------------------------------------------
// Records

enum class FixStatus { Fixed, NotConverged, InsufficientSatellites, SingularGeometry };

inline std::string_view to_string(FixStatus s) {
  switch (s) {
    case FixStatus::Fixed: return "fix";
    case FixStatus::NotConverged: return "not_converged";
    case FixStatus::InsufficientSatellites: return "no_fix_insufficient";
    case FixStatus::SingularGeometry: return "no_fix_singular";
  }
  return "unknown";
}

struct EpochFix {
  Geodetic geodetic;
  Vec3 local = Vec3::Zero();
  double clock_bias = 0.0;  // [s]
  int iterations = 0;
  bool converged = false;
};

/// One epoch of output: every field of the plugin's published message plus
/// simulator-only ground truth.
struct EpochRecord {
  double timestamp = 0.0;
  FixStatus status = FixStatus::InsufficientSatellites;
  std::optional<EpochFix> fix;
  std::optional<DopComponents> dop;
  std::vector<int> prns;
  std::vector<Visibility> visibility;
  std::vector<double> range_offset;  // per PRN [m]; 0 unless multipath
  std::vector<double> noise;         // per PRN [m]; 0 unless usable
  std::vector<int> sats_blocked;
  int num_vis_sat = 0;
  int num_block_sat = 0;
  int num_below_mask = 0;
  Vec3 truth = Vec3::Zero();
  std::optional<double> fix_error;  // |fix - truth| [m]

  bool has_fix() const { return fix.has_value(); }
};

inline nlohmann::ordered_json to_json(const EpochRecord& r) {
  nlohmann::ordered_json j;
  j["timestamp"] = r.timestamp;
  j["status"] = to_string(r.status);
  if (r.fix) {
    j["converged"] = r.fix->converged;
    j["rec_pos"] = {{"lat_deg", r.fix->geodetic.latitude * constants::kRadToDeg},
                    {"lon_deg", r.fix->geodetic.longitude * constants::kRadToDeg},
                    {"alt_m", r.fix->geodetic.altitude}};
    j["local"] = {r.fix->local.x(), r.fix->local.y(), r.fix->local.z()};
    j["clock_bias_s"] = r.fix->clock_bias;
    j["iterations"] = r.fix->iterations;
  } else {
    j["converged"] = false;
    j["rec_pos"] = nullptr;
    j["local"] = nullptr;
    j["clock_bias_s"] = nullptr;
    j["iterations"] = 0;
  }
  if (r.dop) {
    j["dop"] = {{"gdop", r.dop->gdop}, {"pdop", r.dop->pdop}, {"hdop", r.dop->hdop},
                {"vdop", r.dop->vdop}, {"tdop", r.dop->tdop}, {"rating", to_string(r.dop->rating)}};
  } else {
    j["dop"] = nullptr;
  }
  j["prns"] = r.prns;
  nlohmann::ordered_json vis = nlohmann::ordered_json::array();
  for (const auto v : r.visibility) vis.push_back(to_string(v));
  j["visibility"] = vis;
  j["range_offset"] = r.range_offset;
  j["noise"] = r.noise;
  j["sats_blocked"] = r.sats_blocked;
  j["num_vis_sat"] = r.num_vis_sat;
  j["num_block_sat"] = r.num_block_sat;
  j["num_below_mask"] = r.num_below_mask;
  j["truth_local"] = {r.truth.x(), r.truth.y(), r.truth.z()};
  j["fix_error"] = r.fix_error ? nlohmann::ordered_json(*r.fix_error) : nlohmann::ordered_json(nullptr);
  return j;
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

template <class T, class F>
std::string joined(const std::vector<T>& values, F&& format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += format(values[i]);
  }
  return out;
}

}  // namespace detail

inline std::string csv_header() {
  return "timestamp,status,converged,lat_deg,lon_deg,alt_m,east,north,up,clock_bias_s,"
         "gdop,pdop,hdop,vdop,tdop,rating,num_vis_sat,num_block_sat,num_below_mask,"
         "prns,range_offset,noise,sats_blocked,fix_error";
}

/// List-valued fields are ';'-separated inside one column. Absent values are
/// left empty.
inline std::string to_csv_row(const EpochRecord& r) {
  using detail::fmt;
  std::ostringstream os;
  os << fmt(r.timestamp) << ',' << to_string(r.status) << ',' << (r.fix && r.fix->converged ? 1 : 0);
  if (r.fix) {
    os << ',' << fmt(r.fix->geodetic.latitude * constants::kRadToDeg) << ','
       << fmt(r.fix->geodetic.longitude * constants::kRadToDeg) << ',' << fmt(r.fix->geodetic.altitude)
       << ',' << fmt(r.fix->local.x()) << ',' << fmt(r.fix->local.y()) << ',' << fmt(r.fix->local.z())
       << ',' << fmt(r.fix->clock_bias);
  } else {
    os << ",,,,,,,";
  }
  if (r.dop) {
    os << ',' << fmt(r.dop->gdop) << ',' << fmt(r.dop->pdop) << ',' << fmt(r.dop->hdop) << ','
       << fmt(r.dop->vdop) << ',' << fmt(r.dop->tdop) << ',' << to_string(r.dop->rating);
  } else {
    os << ",,,,,,";
  }
  const auto int_str = [](int v) { return std::to_string(v); };
  os << ',' << r.num_vis_sat << ',' << r.num_block_sat << ',' << r.num_below_mask << ','
     << detail::joined(r.prns, int_str) << ',' << detail::joined(r.range_offset, fmt) << ','
     << detail::joined(r.noise, fmt) << ',' << detail::joined(r.sats_blocked, int_str) << ','
     << (r.fix_error ? fmt(*r.fix_error) : std::string());
  return os.str();
}

/// Streams records as JSON lines or CSV (header written on construction).
class RecordWriter {
 public:
  RecordWriter(std::ostream& out, OutputFormat format) : out_(&out), format_(format) {
    if (format_ == OutputFormat::Csv) *out_ << csv_header() << '\n';
  }

  void operator()(const EpochRecord& r) {
    if (format_ == OutputFormat::Csv) {
      *out_ << to_csv_row(r) << '\n';
    } else {
      *out_ << to_json(r).dump() << '\n';
    }
  }

 private:
  std::ostream* out_;
  OutputFormat format_;
};

// ---------------------------------------------------------------------------
// Simulation

class Simulation {
 public:
  /// Loads the city model and satellite source referenced by `cfg`.
  /// Any failure is reported as ConfigError.
  explicit Simulation(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    try {
      init(std::make_shared<const CityModel>(load_city_model(cfg_.city_model)));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }

  /// Uses an already-built model; `cfg.city_model` is ignored.
  Simulation(ScenarioConfig cfg, CityModel model) : cfg_(std::move(cfg)) {
    cfg_.validate();
    try {
      init(std::make_shared<const CityModel>(std::move(model)));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }

  const ScenarioConfig& config() const { return cfg_; }
  const CityModel& model() const { return *model_; }
  const GridIndex& index() const { return *index_; }
  const std::vector<int>& prns() const { return prns_; }

  Vec3 receiver_at(double t) const { return interpolate_trajectory(cfg_.trajectory, t); }
  double epoch_time(int k) const { return cfg_.start_time + k * cfg_.dt; }

  std::vector<SatelliteState> satellites_at(double t, const Vec3& receiver) const {
    if (const auto* fixed = std::get_if<FixedSource>(&cfg_.satellites)) {
      return fixed_constellation(fixed->satellites, receiver, model_->origin());
    }
    const auto& eph = std::get<EphemerisSource>(cfg_.satellites);
    return ephemeris_constellation(ephemerides_, t, eph.earth_rotation, receiver, model_->origin());
  }

  NoiseBank make_noise(std::uint64_t seed) const {
    OuNoiseConfig noise = cfg_.receiver.noise;
    noise.seed = seed;
    return make_noise_bank(prns_, noise);
  }

  /// Measurements, fix and DOP for one epoch at receiver position `truth`.
  EpochRecord simulate_epoch(double t, const Vec3& truth, NoiseBank& noise) const {
    const auto sats = satellites_at(t, truth);
    const auto meas = epoch_measurements(*index_, sats, truth, cfg_.receiver, noise);

    EpochRecord rec;
    rec.timestamp = t;
    rec.truth = truth;
    for (const auto& m : meas) {
      rec.prns.push_back(m.prn);
      rec.visibility.push_back(m.visibility);
      rec.range_offset.push_back(m.multipath_offset);
      rec.noise.push_back(is_usable(m.visibility) ? m.noise : 0.0);
      switch (m.visibility) {
        case Visibility::LosClear:
        case Visibility::Multipath: ++rec.num_vis_sat; break;
        case Visibility::Blocked:
          ++rec.num_block_sat;
          rec.sats_blocked.push_back(m.prn);
          break;
        case Visibility::BelowMask: ++rec.num_below_mask; break;
      }
    }

    const auto obs = usable_observations(meas);
    FixSolution sol;
    try {
      sol = solve_position(std::span<const RangeObservation>(obs), cfg_.initial_position,
                           cfg_.initial_clock_bias, cfg_.solver);
    } catch (const InsufficientSatellites&) {
      rec.status = FixStatus::InsufficientSatellites;
      return rec;
    } catch (const SingularGeometry&) {
      rec.status = FixStatus::SingularGeometry;
      return rec;
    }
    if (!sol.position.allFinite()) {
      rec.status = FixStatus::SingularGeometry;
      return rec;
    }

    rec.status = sol.converged ? FixStatus::Fixed : FixStatus::NotConverged;
    EpochFix fix;
    fix.local = sol.position;
    fix.geodetic = local_to_geodetic(sol.position, model_->origin());
    fix.clock_bias = sol.clock_bias;
    fix.iterations = sol.iterations;
    fix.converged = sol.converged;
    rec.fix = fix;
    rec.fix_error = (sol.position - truth).norm();

    std::vector<Vec3> sat_pos;
    sat_pos.reserve(obs.size());
    for (const auto& o : obs) sat_pos.push_back(o.satellite);
    const Eigen::Matrix3d to_enu =
        ecef_to_enu_rotation(fix.geodetic) * ecef_to_enu_rotation(model_->origin()).transpose();
    try {
      rec.dop = compute_dop(sat_pos, sol.position, cfg_.receiver.pseudorange_sigma, to_enu);
    } catch (const SingularGeometry&) {
      rec.dop.reset();
    }
    return rec;
  }

  /// Runs every epoch in order and hands each record to `sink`.
  template <class Sink>
  void run(Sink&& sink) const {
    NoiseBank noise = make_noise(cfg_.master_seed);
    for (int k = 0; k < cfg_.epochs; ++k) {
      const double t = epoch_time(k);
      sink(simulate_epoch(t, receiver_at(t), noise));
    }
  }

 private:
  void init(std::shared_ptr<const CityModel> model) {
    model_ = std::move(model);
    index_ = std::make_shared<const GridIndex>(*model_);
    if (const auto* fixed = std::get_if<FixedSource>(&cfg_.satellites)) {
      for (const auto& s : fixed->satellites) prns_.push_back(s.prn);
    } else {
      ephemerides_ = load_ephemeris(std::get<EphemerisSource>(cfg_.satellites).file);
      for (const auto& e : ephemerides_) prns_.push_back(e.prn);
    }
    auto sorted = prns_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("duplicate PRN in satellite source");
    }
  }

  ScenarioConfig cfg_;
  std::shared_ptr<const CityModel> model_;
  std::shared_ptr<const GridIndex> index_;
  std::vector<KeplerianEphemeris> ephemerides_;
  std::vector<int> prns_;
};

inline std::vector<EpochRecord> run_scenario(const Simulation& sim) {
  std::vector<EpochRecord> out;
  out.reserve(static_cast<std::size_t>(sim.config().epochs));
  sim.run([&](EpochRecord r) { out.push_back(std::move(r)); });
  return out;
}

inline std::vector<EpochRecord> run_scenario(const ScenarioConfig& cfg) {
  return run_scenario(Simulation(cfg));
}

}  // namespace urbangnss
