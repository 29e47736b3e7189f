#ifndef EXPLORE_SIM_HPP
#define EXPLORE_SIM_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "explore/geometry.hpp"
#include "explore/grid.hpp"

namespace explore::sim {

struct SimConfig {
  int n_robots = 3;
  double sensor_radius = 10.0;  // m
  double dt = 0.1;              // s
  double robot_speed = 2.0;     // m/s
  int lidar_rays = 360;
  double prediction_period = 2.5;  // s
  int inflation_cells = 1;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument if a field is out of range or the prediction period is not
  /// a whole number of ticks.
  void validate() const;
  /// Ticks per prediction period.
  [[nodiscard]] long prediction_ticks() const;
};

struct RobotState {
  int id = 0;
  Vec2 position{};
  double heading = 0.0;
  double speed = 0.0;
  std::optional<int> goal_task;
  std::optional<Vec2> goal_point;
  std::vector<Vec2> waypoints;  // remaining, in order
  std::vector<grid::CellIndex> path_cells;
};

/// Casts `rays` evenly spaced rays from `origin` out to `radius` against `truth`. Traversed cells
/// become Free in `observed`, the first truth-Occupied cell on a ray becomes Occupied.
/// Returns the number of cells that were Unknown before the call. Cells that turned Occupied are
/// appended to `new_occupied` when given.
std::size_t sense(
    const Vec2& origin,
    const grid::OccupancyGrid& truth,
    grid::OccupancyGrid& observed,
    double radius,
    int rays,
    std::vector<grid::CellIndex>* new_occupied = nullptr);

/// Convenience overload using the robot position and the config's sensor.
std::size_t sense(const RobotState& robot, const grid::OccupancyGrid& truth, grid::OccupancyGrid& observed, const SimConfig& config);

/// Random start poses on the map border, on truth-free cells, heading roughly at the center.
[[nodiscard]] std::vector<RobotState> edge_starts(const grid::OccupancyGrid& truth, int count, std::mt19937_64& rng);

struct StepReport {
  std::vector<int> unreachable;  // robots whose goal became unreachable this tick
  std::vector<int> arrived;      // robots that reached their goal point this tick
  std::size_t newly_known = 0;
};

/// One trial's physical state: ground truth, fused observation, and the robots.
class World {
 public:
  World(grid::OccupancyGrid truth, SimConfig config, std::vector<RobotState> robots);

  [[nodiscard]] const grid::OccupancyGrid& truth() const { return truth_; }
  [[nodiscard]] const grid::OccupancyGrid& observed() const { return observed_; }
  [[nodiscard]] const std::vector<std::uint8_t>& blocked() const { return blocked_; }
  [[nodiscard]] const std::vector<RobotState>& robots() const { return robots_; }
  [[nodiscard]] const RobotState& robot(int id) const { return robots_.at(static_cast<std::size_t>(id)); }
  [[nodiscard]] const SimConfig& config() const { return config_; }
  [[nodiscard]] double time() const { return static_cast<double>(tick_) * config_.dt; }
  [[nodiscard]] long tick() const { return tick_; }

  /// Fraction of cells that are no longer Unknown.
  [[nodiscard]] double explored_fraction() const;

  /// Plans a path to `point`; on failure the robot's goal is cleared and false returned.
  bool set_goal(int robot_id, std::optional<int> task, const Vec2& point);
  void clear_goal(int robot_id);

  /// Moves every robot `robot_speed * dt` along its path, senses, and replans paths that now
  /// cross observed obstacles. Robots without a goal stay put.
  StepReport step();

  /// FNV-1a over robot poses, the observation and the clock.
  [[nodiscard]] std::uint64_t state_hash() const;

  [[nodiscard]] nlohmann::json checkpoint_json() const;
  /// Writes `checkpoint_<tick>.json` and `checkpoint_<tick>_observed.png` into `dir`.
  void write_checkpoint(const std::filesystem::path& dir) const;

 private:
  std::size_t sense_robot(const RobotState& robot);
  bool replan(RobotState& robot);
  void advance(RobotState& robot, double distance);

  grid::OccupancyGrid truth_;
  grid::OccupancyGrid observed_;
  std::vector<std::uint8_t> blocked_;
  std::size_t known_ = 0;
  SimConfig config_;
  std::vector<RobotState> robots_;
  long tick_ = 0;
  std::vector<grid::CellIndex> scratch_occupied_;
};

}  // namespace explore::sim

#endif  // EXPLORE_SIM_HPP
