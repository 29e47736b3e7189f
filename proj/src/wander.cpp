#include "explore/wander.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "explore/image_io.hpp"
#include "explore/seeding.hpp"
#include "explore/sim.hpp"

namespace explore::sim {

using grid::CellState;
using grid::OccupancyGrid;

std::vector<double> training_schedule() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}; }

std::vector<double> test_schedule() { return {0.20, 0.35, 0.50, 0.65, 0.80}; }

std::string coverage_label(double level) {
  const double pct = level * 100.0;
  std::ostringstream out;
  if (std::abs(pct - std::round(pct)) < 1e-9) {
    out << std::lround(pct);
  } else {
    out.precision(1);
    out << std::fixed << pct;
  }
  return out.str();
}

namespace {

struct Wanderer {
  Vec2 position;
  Vec2 goal_direction;
  std::deque<Vec2> history;
};

Vec2 normalized(const Vec2& v) {
  const double n = v.norm();
  return n > 0.0 ? v * (1.0 / n) : Vec2{1.0, 0.0};
}

bool cell_blocked(const OccupancyGrid& observed, const OccupancyGrid& truth, const Vec2& p) {
  const auto cell = truth.world_to_cell(p);
  if (!cell) {
    return true;
  }
  if (truth.at(*cell) == CellState::Occupied) {
    return true;
  }
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (observed.contains(cell->x + dx, cell->y + dy) && observed.at(cell->x + dx, cell->y + dy) == CellState::Occupied) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

RolloutResult wander_rollout(const OccupancyGrid& truth, const WanderConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  OccupancyGrid observed(truth.width(), truth.height(), truth.resolution(), truth.origin(), CellState::Unknown);
  std::vector<double> schedule = config.schedule;
  std::sort(schedule.begin(), schedule.end());

  const Vec2 lo = truth.origin();
  const Vec2 hi = lo + truth.extent();
  const Vec2 center = lo + truth.extent() * 0.5;
  const double edge_margin = 0.5;
  const auto history_len = static_cast<std::size_t>(std::lround(config.stall_window / config.dt)) + 1;

  std::vector<Wanderer> robots;
  for (const RobotState& start : edge_starts(truth, config.n_robots, rng)) {
    robots.push_back({start.position, unit_from_angle(start.heading), {}});
  }

  // New goal direction; near an edge only directions pointing back into the map are drawn.
  auto resample = [&](Wanderer& w) {
    const Vec2 inward = center - w.position;
    for (int attempt = 0; attempt < 64; ++attempt) {
      const Vec2 d = unit_from_angle(angle(rng));
      if (d.dot(inward) > 0.0 || attempt == 63) {
        w.goal_direction = d;
        break;
      }
    }
    w.history.clear();
  };

  std::size_t known = 0;
  for (const Wanderer& w : robots) {
    known += sense(w.position, truth, observed, config.sensor_radius, config.lidar_rays);
  }

  RolloutResult result;
  std::size_t next_level = 0;
  auto record = [&](long step) {
    const double coverage = static_cast<double>(known) / static_cast<double>(truth.size());
    while (next_level < schedule.size() && coverage >= schedule[next_level]) {
      result.snapshots.push_back({schedule[next_level], coverage, step, observed});
      ++next_level;
    }
    result.final_coverage = coverage;
  };
  record(0);

  const int influence_cells = static_cast<int>(std::ceil(config.influence_radius / truth.resolution()));
  long step = 0;
  for (; step < config.max_steps && next_level < schedule.size(); ++step) {
    for (Wanderer& w : robots) {
      Vec2 force = w.goal_direction * config.attraction_gain;
      const auto cell = truth.world_to_cell(w.position);
      for (int dy = -influence_cells; cell && dy <= influence_cells; ++dy) {
        for (int dx = -influence_cells; dx <= influence_cells; ++dx) {
          const int x = cell->x + dx;
          const int y = cell->y + dy;
          if (!observed.contains(x, y) || observed.at(x, y) != CellState::Occupied) {
            continue;
          }
          const Vec2 away = w.position - observed.cell_center(x, y);
          const double d = std::max(away.norm(), 0.05);
          if (d >= config.influence_radius) {
            continue;
          }
          const double magnitude = config.repulsion_gain * (1.0 / d - 1.0 / config.influence_radius) / (d * d);
          force += away * (magnitude / d);
        }
      }
      const Vec2 next = w.position + normalized(force) * (config.speed * config.dt);
      const bool at_edge = next.x < lo.x + edge_margin || next.y < lo.y + edge_margin || next.x > hi.x - edge_margin ||
                           next.y > hi.y - edge_margin;
      if (at_edge || cell_blocked(observed, truth, next)) {
        resample(w);
        continue;
      }
      w.position = next;
      w.history.push_back(next);
      if (w.history.size() > history_len) {
        w.history.pop_front();
      }
      if (w.history.size() == history_len && distance(w.history.front(), w.history.back()) < config.stall_distance) {
        resample(w);
      }
    }
    for (const Wanderer& w : robots) {
      known += sense(w.position, truth, observed, config.sensor_radius, config.lidar_rays);
    }
    record(step + 1);
  }
  result.steps = step;
  result.truncated = next_level < schedule.size();
  return result;
}

namespace {

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("write failed for '" + path.string() + "'");
  }
}

void make_dirs(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create directory '" + dir.string() + "': " + ec.message());
  }
}

}  // namespace

DatasetSummary export_dataset(const DatasetSpec& spec) {
  DatasetSummary summary;
  make_dirs(spec.out);
  for (int m = 0; m < spec.map_count; ++m) {
    const std::uint64_t seed = spec.first_seed + static_cast<std::uint64_t>(m);
    worldgen::TownParams town = spec.town;
    town.seed = seed;
    const auto [layout, truth] = worldgen::generate(town);
    const std::filesystem::path map_dir = spec.out / ("map_" + std::to_string(seed));
    make_dirs(map_dir);
    image_io::write_grid_png(map_dir / "truth.png", truth);
    write_json(map_dir / "layout.json", worldgen::to_json(layout));
    ++summary.maps;

    for (int k = 0; k < spec.rollouts_per_map; ++k) {
      const RolloutResult rollout = wander_rollout(truth, spec.wander, derive_seed(seed, static_cast<std::uint64_t>(k)));
      const std::filesystem::path dir = map_dir / ("rollout_" + std::to_string(k));
      make_dirs(dir);
      summary.truncated_rollouts += rollout.truncated ? 1 : 0;
      for (const Snapshot& snap : rollout.snapshots) {
        const std::string stem = "snap_" + coverage_label(snap.coverage_level);
        const grid::GridImage image = grid::encode(snap.observed);
        image_io::write_grid_png(dir / (stem + ".png"), snap.observed);
        image_io::write_mask_png(dir / (stem + "_mask.png"), image);
        write_json(
            dir / (stem + "_meta.json"),
            {{"seed", seed},
             {"rollout", k},
             {"coverage_level", snap.coverage_level},
             {"explored_fraction", snap.explored_fraction},
             {"step", snap.step},
             {"truncated_rollout", rollout.truncated}});
        ++summary.snapshots;
      }
    }
  }
  return summary;
}

}  // namespace explore::sim
