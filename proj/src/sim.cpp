#include "explore/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

#include "explore/image_io.hpp"
#include "explore/path_planner.hpp"
#include "explore/raycast.hpp"

namespace explore::sim {

using grid::CellIndex;
using grid::CellState;
using grid::OccupancyGrid;

void SimConfig::validate() const {
  if (n_robots <= 0) {
    throw std::invalid_argument("sim config: n_robots must be positive");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("sim config: dt must be positive");
  }
  if (!(sensor_radius > 0.0)) {
    throw std::invalid_argument("sim config: sensor_radius must be positive");
  }
  if (!(robot_speed > 0.0) || lidar_rays <= 0 || inflation_cells < 0) {
    throw std::invalid_argument("sim config: invalid robot speed, lidar rays or inflation");
  }
  const double ratio = prediction_period / dt;
  if (!(prediction_period > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-6) {
    throw std::invalid_argument("sim config: prediction_period must be a multiple of dt");
  }
}

long SimConfig::prediction_ticks() const { return std::lround(prediction_period / dt); }

std::size_t sense(
    const Vec2& origin,
    const OccupancyGrid& truth,
    OccupancyGrid& observed,
    double radius,
    int rays,
    std::vector<CellIndex>* new_occupied) {
  grid::require_same_shape(truth, observed, "sense");
  std::size_t newly_known = 0;
  for (int k = 0; k < rays; ++k) {
    traverse_ray(truth, origin, ray_direction(k, rays), radius, [&](CellIndex c, double) {
      const std::size_t idx = truth.index(c.x, c.y);
      const bool was_unknown = observed[idx] == CellState::Unknown;
      newly_known += was_unknown ? 1 : 0;
      if (truth[idx] == CellState::Occupied) {
        observed[idx] = CellState::Occupied;
        if (was_unknown && new_occupied != nullptr) {
          new_occupied->push_back(c);
        }
        return false;
      }
      observed[idx] = CellState::Free;
      return true;
    });
  }
  return newly_known;
}

std::size_t sense(const RobotState& robot, const OccupancyGrid& truth, OccupancyGrid& observed, const SimConfig& config) {
  return sense(robot.position, truth, observed, config.sensor_radius, config.lidar_rays);
}

std::vector<RobotState> edge_starts(const OccupancyGrid& truth, int count, std::mt19937_64& rng) {
  const Vec2 extent = truth.extent();
  const Vec2 center = truth.origin() + extent * 0.5;
  const double inset = 1.0;
  const double w = extent.x - 2.0 * inset;
  const double h = extent.y - 2.0 * inset;
  std::uniform_real_distribution<double> perimeter(0.0, 2.0 * (w + h));
  std::uniform_real_distribution<double> bias(-std::numbers::pi / 4.0, std::numbers::pi / 4.0);
  auto clear = [&](const Vec2& p) {
    const auto cell = truth.world_to_cell(p);
    if (!cell) {
      return false;
    }
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (truth.contains(cell->x + dx, cell->y + dy) && truth.at(cell->x + dx, cell->y + dy) == CellState::Occupied) {
          return false;
        }
      }
    }
    return true;
  };

  std::vector<RobotState> robots;
  for (int id = 0; id < count; ++id) {
    RobotState r;
    r.id = id;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      double s = perimeter(rng);
      Vec2 p = truth.origin() + Vec2{inset, inset};
      if (s < w) {
        p += {s, 0.0};
      } else if ((s -= w) < h) {
        p += {w, s};
      } else if ((s -= h) < w) {
        p += {w - s, h};
      } else {
        s -= w;
        p += {0.0, h - s};
      }
      r.position = p;
      if (clear(p)) {
        break;
      }
    }
    const Vec2 to_center = center - r.position;
    r.heading = std::atan2(to_center.y, to_center.x) + bias(rng);
    robots.push_back(r);
  }
  return robots;
}

World::World(OccupancyGrid truth, SimConfig config, std::vector<RobotState> robots)
    : truth_{std::move(truth)},
      observed_{truth_.width(), truth_.height(), truth_.resolution(), truth_.origin(), CellState::Unknown},
      blocked_(truth_.size(), 0),
      config_{config},
      robots_{std::move(robots)} {
  config_.validate();
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    robots_[i].id = static_cast<int>(i);
    if (!truth_.contains_point(robots_[i].position)) {
      throw std::invalid_argument("world: robot starts outside the map");
    }
  }
  for (const RobotState& r : robots_) {
    known_ += sense_robot(r);
  }
}

double World::explored_fraction() const { return static_cast<double>(known_) / static_cast<double>(observed_.size()); }

std::size_t World::sense_robot(const RobotState& robot) {
  scratch_occupied_.clear();
  const std::size_t newly = sense(robot.position, truth_, observed_, config_.sensor_radius, config_.lidar_rays, &scratch_occupied_);
  const int r = config_.inflation_cells;
  for (const CellIndex& c : scratch_occupied_) {
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (observed_.contains(c.x + dx, c.y + dy)) {
          blocked_[observed_.index(c.x + dx, c.y + dy)] = 1;
        }
      }
    }
  }
  return newly;
}

bool World::replan(RobotState& robot) {
  robot.waypoints.clear();
  robot.path_cells.clear();
  if (!robot.goal_point) {
    return false;
  }
  const auto start = observed_.world_to_cell(robot.position);
  const auto goal = observed_.world_to_cell(*robot.goal_point);
  if (!start || !goal) {
    return false;
  }
  const auto path = plan_path(observed_, blocked_, *start, *goal);
  if (!path) {
    return false;
  }
  for (std::size_t i = 1; i < path->size(); ++i) {
    robot.path_cells.push_back((*path)[i]);
    robot.waypoints.push_back(observed_.cell_center((*path)[i]));
  }
  return true;
}

bool World::set_goal(int robot_id, std::optional<int> task, const Vec2& point) {
  RobotState& robot = robots_.at(static_cast<std::size_t>(robot_id));
  if (robot.goal_point && robot.goal_task == task && *robot.goal_point == point && !robot.waypoints.empty()) {
    return true;
  }
  robot.goal_task = task;
  robot.goal_point = point;
  if (!replan(robot)) {
    clear_goal(robot_id);
    return false;
  }
  return true;
}

void World::clear_goal(int robot_id) {
  RobotState& robot = robots_.at(static_cast<std::size_t>(robot_id));
  robot.goal_task.reset();
  robot.goal_point.reset();
  robot.waypoints.clear();
  robot.path_cells.clear();
  robot.speed = 0.0;
}

void World::advance(RobotState& robot, double distance) {
  double remaining = distance;
  std::size_t consumed = 0;
  while (remaining > 0.0 && consumed < robot.waypoints.size()) {
    const Vec2 target = robot.waypoints[consumed];
    const CellIndex target_cell = robot.path_cells[consumed];
    if (truth_.at(target_cell) == CellState::Occupied) {
      break;  // never enter an obstacle, even an unobserved one
    }
    const Vec2 delta = target - robot.position;
    const double d = delta.norm();
    if (d > 0.0) {
      robot.heading = std::atan2(delta.y, delta.x);
    }
    if (d <= remaining) {
      robot.position = target;
      remaining -= d;
      ++consumed;
    } else {
      robot.position += delta * (remaining / d);
      remaining = 0.0;
    }
  }
  robot.waypoints.erase(robot.waypoints.begin(), robot.waypoints.begin() + static_cast<std::ptrdiff_t>(consumed));
  robot.path_cells.erase(robot.path_cells.begin(), robot.path_cells.begin() + static_cast<std::ptrdiff_t>(consumed));
  robot.speed = remaining < distance ? config_.robot_speed : 0.0;
}

StepReport World::step() {
  StepReport report;
  const double distance = config_.robot_speed * config_.dt;
  for (RobotState& robot : robots_) {
    if (!robot.goal_point) {
      robot.speed = 0.0;
      continue;
    }
    const bool had_path = !robot.waypoints.empty();
    advance(robot, distance);
    if (had_path && robot.waypoints.empty()) {
      report.arrived.push_back(robot.id);
    }
  }
  bool new_obstacles = false;
  for (const RobotState& robot : robots_) {
    report.newly_known += sense_robot(robot);
    new_obstacles = new_obstacles || !scratch_occupied_.empty();
  }
  known_ += report.newly_known;
  for (RobotState& robot : robots_) {
    if (!robot.goal_point || robot.waypoints.empty()) {
      continue;
    }
    bool stale = false;
    if (new_obstacles) {
      const CellIndex goal_cell = robot.path_cells.back();
      stale = observed_.at(goal_cell) == CellState::Occupied;
      for (std::size_t i = 0; !stale && i + 1 < robot.path_cells.size(); ++i) {
        stale = blocked_[observed_.index(robot.path_cells[i].x, robot.path_cells[i].y)] != 0;
      }
    }
    // A truth obstacle in the next cell means the path ran into something not yet observed.
    stale = stale || truth_.at(robot.path_cells.front()) == CellState::Occupied;
    if (stale && !replan(robot)) {
      report.unreachable.push_back(robot.id);
      clear_goal(robot.id);
    }
  }
  ++tick_;
  return report;
}

std::uint64_t World::state_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  mix(&tick_, sizeof(tick_));
  for (const RobotState& r : robots_) {
    mix(&r.position.x, sizeof(double));
    mix(&r.position.y, sizeof(double));
    mix(&r.heading, sizeof(double));
  }
  mix(observed_.cells().data(), observed_.cells().size_bytes());
  return h;
}

nlohmann::json World::checkpoint_json() const {
  nlohmann::json robots = nlohmann::json::array();
  for (const RobotState& r : robots_) {
    nlohmann::json j{
        {"id", r.id},
        {"position", {r.position.x, r.position.y}},
        {"heading", r.heading},
        {"speed", r.speed},
        {"remaining_waypoints", r.waypoints.size()},
    };
    j["goal_task"] = r.goal_task ? nlohmann::json(*r.goal_task) : nlohmann::json(nullptr);
    j["goal_point"] = r.goal_point ? nlohmann::json{r.goal_point->x, r.goal_point->y} : nlohmann::json(nullptr);
    robots.push_back(std::move(j));
  }
  return {{"tick", tick_}, {"time", time()}, {"explored_fraction", explored_fraction()}, {"robots", std::move(robots)}};
}

void World::write_checkpoint(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  const std::string stem = "checkpoint_" + std::to_string(tick_);
  std::ofstream out(dir / (stem + ".json"));
  if (!out) {
    throw std::runtime_error("cannot write checkpoint into '" + dir.string() + "'");
  }
  out << checkpoint_json().dump(2) << '\n';
  image_io::write_grid_png(dir / (stem + "_observed.png"), observed_);
}

}  // namespace explore::sim
