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
/// Position-error heat maps over a horizontal grid.
///
/// Each cell is an independent static-receiver run at the cell centre. Its
/// noise bank is seeded from (master seed, row, column), so a cell's result
/// does not depend on which worker computed it or in what order.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "urbangnss/scenario.hpp"

namespace urbangnss {

struct HeatmapSpec {
  double east_min = 0.0;
  double north_min = 0.0;
  double east_max = 0.0;
  double north_max = 0.0;
  double cell_size = 1.0;   // [m]
  double altitude = 15.0;   // receiver height above ground [m]
  int epochs_per_cell = 1;

  void validate() const {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw ConfigError("cell size must be positive");
    if (!(east_max > east_min) || !(north_max > north_min)) {
      throw ConfigError("heat-map bounding box is degenerate");
    }
    if (!std::isfinite(east_max - east_min) || !std::isfinite(north_max - north_min)) {
      throw ConfigError("heat-map bounding box is not finite");
    }
    if (!std::isfinite(altitude)) throw ConfigError("altitude must be finite");
    if (epochs_per_cell < 1) throw ConfigError("epochs per cell must be >= 1");
  }

  int columns() const { return static_cast<int>(std::ceil((east_max - east_min) / cell_size)); }
  int rows() const { return static_cast<int>(std::ceil((north_max - north_min) / cell_size)); }

  Vec3 cell_center(int row, int col) const {
    return {east_min + (col + 0.5) * cell_size, north_min + (row + 0.5) * cell_size, altitude};
  }
};

struct HeatmapCell {
  int row = 0;
  int col = 0;
  double east = 0.0;
  double north = 0.0;
  int fix_epochs = 0;
  std::optional<double> mean_fix_error;  // empty: no fix in any epoch
  std::optional<double> mean_gdop;
  double mean_visible = 0.0;

  bool operator==(const HeatmapCell&) const = default;
};

struct HeatmapGrid {
  HeatmapSpec spec;
  int rows = 0;
  int cols = 0;
  std::vector<HeatmapCell> cells;  // row-major

  const HeatmapCell& at(int row, int col) const {
    if (row < 0 || row >= rows || col < 0 || col >= cols) throw std::out_of_range("heat-map cell");
    return cells[static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(col)];
  }
};

inline std::uint64_t cell_seed(std::uint64_t master, int row, int col) {
  return mix_seed(mix_seed(master, static_cast<std::uint64_t>(row)), static_cast<std::uint64_t>(col));
}

inline HeatmapCell compute_heatmap_cell(const Simulation& sim, const HeatmapSpec& spec, int row, int col) {
  HeatmapCell cell;
  cell.row = row;
  cell.col = col;
  const Vec3 receiver = spec.cell_center(row, col);
  cell.east = receiver.x();
  cell.north = receiver.y();

  NoiseBank noise = sim.make_noise(cell_seed(sim.config().master_seed, row, col));
  double err_sum = 0.0;
  double gdop_sum = 0.0;
  int gdop_count = 0;
  long visible_sum = 0;
  for (int k = 0; k < spec.epochs_per_cell; ++k) {
    const auto rec = sim.simulate_epoch(sim.epoch_time(k), receiver, noise);
    visible_sum += rec.num_vis_sat;
    if (rec.fix_error) {
      ++cell.fix_epochs;
      err_sum += *rec.fix_error;
    }
    if (rec.dop) {
      ++gdop_count;
      gdop_sum += rec.dop->gdop;
    }
  }
  if (cell.fix_epochs > 0) cell.mean_fix_error = err_sum / cell.fix_epochs;
  if (gdop_count > 0) cell.mean_gdop = gdop_sum / gdop_count;
  cell.mean_visible = static_cast<double>(visible_sum) / spec.epochs_per_cell;
  return cell;
}

/// Computes every cell. Workers pull cell indices from a shared counter and
/// write into their own slot, so the grid is identical for any worker count.
inline HeatmapGrid generate_heatmap(const Simulation& sim, const HeatmapSpec& spec, unsigned workers = 1) {
  spec.validate();
  HeatmapGrid grid;
  grid.spec = spec;
  grid.rows = spec.rows();
  grid.cols = spec.columns();
  const std::size_t total = static_cast<std::size_t>(grid.rows) * static_cast<std::size_t>(grid.cols);
  grid.cells.resize(total);

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
      const int row = static_cast<int>(i / static_cast<std::size_t>(grid.cols));
      const int col = static_cast<int>(i % static_cast<std::size_t>(grid.cols));
      grid.cells[i] = compute_heatmap_cell(sim, spec, row, col);
    }
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(total, 1))));
  if (workers == 1) {
    work();
    return grid;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        work();
      } catch (...) {
        errors[w] = std::current_exception();
        next.store(total);
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return grid;
}

inline HeatmapGrid generate_heatmap(const ScenarioConfig& cfg, const HeatmapSpec& spec, unsigned workers = 1) {
  return generate_heatmap(Simulation(cfg), spec, workers);
}

inline constexpr const char* kNoFixSentinel = "nofix";

/// CSV with one line per cell in row-major order. Metrics that are undefined
/// for a cell are written as the no-fix sentinel.
inline void write_heatmap_csv(const HeatmapGrid& grid, std::ostream& out) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? detail::fmt(*v) : std::string(kNoFixSentinel);
  };
  out << "row,col,east,north,mean_fix_error,mean_gdop,mean_visible,fix_epochs\n";
  for (const auto& c : grid.cells) {
    out << c.row << ',' << c.col << ',' << detail::fmt(c.east) << ',' << detail::fmt(c.north) << ','
        << opt(c.mean_fix_error) << ',' << opt(c.mean_gdop) << ',' << detail::fmt(c.mean_visible) << ','
        << c.fix_epochs << '\n';
  }
}

enum class HeatmapMetric { FixError, Gdop, Visible };

/// Binary 8-bit PGM, north up. Values are scaled linearly to [1, 255] over
/// the grid's range; no-fix cells are 0 (black).
inline void write_heatmap_pgm(const HeatmapGrid& grid, std::ostream& out,
                              HeatmapMetric metric = HeatmapMetric::FixError) {
  const auto value = [&](const HeatmapCell& c) -> std::optional<double> {
    switch (metric) {
      case HeatmapMetric::FixError: return c.mean_fix_error;
      case HeatmapMetric::Gdop: return c.mean_gdop;
      case HeatmapMetric::Visible: return c.mean_visible;
    }
    return std::nullopt;
  };
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const auto& c : grid.cells) {
    if (const auto v = value(c)) {
      lo = any ? std::min(lo, *v) : *v;
      hi = any ? std::max(hi, *v) : *v;
      any = true;
    }
  }
  out << "P5\n" << grid.cols << ' ' << grid.rows << "\n255\n";
  for (int row = grid.rows - 1; row >= 0; --row) {
    for (int col = 0; col < grid.cols; ++col) {
      const auto v = value(grid.at(row, col));
      unsigned char px = 0;
      if (v) {
        const double u = hi > lo ? (*v - lo) / (hi - lo) : 0.5;
        px = static_cast<unsigned char>(1.0 + std::lround(u * 254.0));
      }
      out.put(static_cast<char>(px));
    }
  }
}

}  // namespace urbangnss
