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

// Command-line front end: run, heatmap, raycheck.
// Exit status: 0 success, 1 configuration error, 2 runtime error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "urbangnss.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct RunArgs {
  std::string config;
  std::string out;
  std::string format;
  std::optional<std::uint64_t> seed;
};

struct HeatmapArgs {
  std::string config;
  std::vector<double> bbox;
  double cell = 0.0;
  double alt = 15.0;
  unsigned workers = 1;
  std::optional<int> epochs;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string pgm;
  std::string metric = "fix_error";
};

struct RaycheckArgs {
  std::string model;
  std::vector<double> pos;
  double az = 0.0;
  double el = 0.0;
  double max_range = urbangnss::kDefaultMaxRange;
};

std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  return f;
}

int cmd_run(const RunArgs& args) {
  auto cfg = urbangnss::load_scenario(args.config);
  if (args.seed) {
    cfg.master_seed = *args.seed;
    cfg.receiver.noise.seed = *args.seed;
  }
  std::optional<urbangnss::OutputSpec> out = cfg.output;
  if (!args.out.empty()) out = urbangnss::OutputSpec{args.out, urbangnss::output_format_for(args.out)};
  if (!args.format.empty()) {
    if (!out) out = urbangnss::OutputSpec{};
    out->format = args.format == "csv" ? urbangnss::OutputFormat::Csv : urbangnss::OutputFormat::JsonLines;
  }
  const urbangnss::Simulation sim(cfg);

  std::ofstream file;
  std::ostream* stream = &std::cout;
  auto format = urbangnss::OutputFormat::JsonLines;
  if (out) {
    format = out->format;
    if (!out->path.empty()) {
      file = open_output(out->path.string());
      stream = &file;
    }
  }
  urbangnss::RecordWriter writer(*stream, format);
  int fixes = 0;
  int epochs = 0;
  sim.run([&](const urbangnss::EpochRecord& r) {
    writer(r);
    ++epochs;
    if (r.has_fix()) ++fixes;
  });
  stream->flush();
  if (!*stream) throw std::runtime_error("write failed");
  std::cerr << epochs << " epochs, " << fixes << " with a position fix\n";
  return kExitOk;
}

int cmd_heatmap(const HeatmapArgs& args) {
  auto cfg = urbangnss::load_scenario(args.config);
  if (args.seed) cfg.master_seed = *args.seed;
  urbangnss::HeatmapSpec spec;
  spec.east_min = args.bbox[0];
  spec.north_min = args.bbox[1];
  spec.east_max = args.bbox[2];
  spec.north_max = args.bbox[3];
  spec.cell_size = args.cell;
  spec.altitude = args.alt;
  spec.epochs_per_cell = args.epochs.value_or(cfg.epochs);
  spec.validate();

  const urbangnss::Simulation sim(cfg);
  const unsigned workers = args.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : args.workers;
  const auto grid = urbangnss::generate_heatmap(sim, spec, workers);

  if (args.out.empty()) {
    urbangnss::write_heatmap_csv(grid, std::cout);
  } else {
    auto f = open_output(args.out);
    urbangnss::write_heatmap_csv(grid, f);
  }
  if (!args.pgm.empty()) {
    auto metric = urbangnss::HeatmapMetric::FixError;
    if (args.metric == "gdop") metric = urbangnss::HeatmapMetric::Gdop;
    if (args.metric == "visible") metric = urbangnss::HeatmapMetric::Visible;
    auto f = open_output(args.pgm, true);
    urbangnss::write_heatmap_pgm(grid, f, metric);
  }
  std::cerr << grid.rows << " x " << grid.cols << " cells\n";
  return kExitOk;
}

int cmd_raycheck(const RaycheckArgs& args) {
  urbangnss::CityModel model;
  try {
    model = urbangnss::load_city_model(args.model);
  } catch (const std::exception& e) {
    throw urbangnss::ConfigError(e.what());
  }
  if (!(args.el >= 0.0 && args.el <= urbangnss::constants::kPi / 2.0)) {
    throw urbangnss::ConfigError("elevation must lie in [0, pi/2]");
  }
  if (!(args.max_range > 0.0)) throw urbangnss::ConfigError("max range must be positive");
  const urbangnss::Vec3 pos(args.pos[0], args.pos[1], args.pos[2]);
  const auto rep = urbangnss::raycheck(model, pos, args.az, args.el, args.max_range);
  urbangnss::print_report(rep, model, std::cout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Urban GNSS multipath simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write one record per epoch");
  run_cmd->add_option("--config", run.config, "Scenario file")->required();
  run_cmd->add_option("--out", run.out, "Output path (.csv selects CSV, anything else JSON lines)");
  run_cmd->add_option("--format", run.format, "Output format")->check(CLI::IsMember({"jsonl", "csv"}));
  run_cmd->add_option("--seed", run.seed, "Override the master seed");

  HeatmapArgs heat;
  auto* heat_cmd = app.add_subcommand("heatmap", "Grid of static-receiver runs");
  heat_cmd->add_option("--config", heat.config, "Scenario file")->required();
  heat_cmd->add_option("--bbox", heat.bbox, "E0,N0,E1,N1 in local metres")
      ->required()
      ->delimiter(',')
      ->expected(4);
  heat_cmd->add_option("--cell", heat.cell, "Cell size [m]")->required();
  heat_cmd->add_option("--alt", heat.alt, "Receiver altitude [m]")->required();
  heat_cmd->add_option("--workers", heat.workers, "Worker threads (0 = hardware concurrency)");
  heat_cmd->add_option("--epochs", heat.epochs, "Epochs per cell (default: scenario epochs)");
  heat_cmd->add_option("--seed", heat.seed, "Override the master seed");
  heat_cmd->add_option("--out", heat.out, "CSV output path (default stdout)");
  heat_cmd->add_option("--pgm", heat.pgm, "Also write a grayscale PGM image");
  heat_cmd->add_option("--metric", heat.metric, "PGM metric")
      ->check(CLI::IsMember({"fix_error", "gdop", "visible"}));

  RaycheckArgs ray;
  auto* ray_cmd = app.add_subcommand("raycheck", "Cast the LOS and mirror rays for one direction");
  ray_cmd->add_option("--model", ray.model, "City model file")->required();
  ray_cmd->add_option("--pos", ray.pos, "E,N,U receiver position")->required()->delimiter(',')->expected(3);
  ray_cmd->add_option("--az", ray.az, "Azimuth [rad]")->required();
  ray_cmd->add_option("--el", ray.el, "Elevation [rad]")->required();
  ray_cmd->add_option("--max-range", ray.max_range, "Ray length [m]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*heat_cmd) return cmd_heatmap(heat);
    if (*ray_cmd) return cmd_raycheck(ray);
  } catch (const urbangnss::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
