#ifndef EXPLORE_WANDER_HPP
#define EXPLORE_WANDER_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "explore/grid.hpp"
#include "explore/worldgen.hpp"

namespace explore::sim {

/// Coverage levels at which training snapshots are taken.
[[nodiscard]] std::vector<double> training_schedule();
/// Coverage levels used for held-out evaluation snapshots.
[[nodiscard]] std::vector<double> test_schedule();

/// Potential-field wanderer used to produce observation datasets.
struct WanderConfig {
  int n_robots = 3;
  double sensor_radius = 10.0;
  int lidar_rays = 360;
  double dt = 0.1;
  double speed = 2.0;
  double attraction_gain = 1.0;
  double repulsion_gain = 4.0;
  double influence_radius = 3.0;  // m
  /// Local minimum: net displacement below `stall_distance` over `stall_window` seconds.
  double stall_window = 3.0;
  double stall_distance = 0.5;
  long max_steps = 40000;
  std::vector<double> schedule = training_schedule();
};

struct Snapshot {
  double coverage_level = 0.0;     // threshold that triggered the snapshot
  double explored_fraction = 0.0;  // actual coverage when it was taken
  long step = 0;
  grid::OccupancyGrid observed;
};

struct RolloutResult {
  std::vector<Snapshot> snapshots;
  long steps = 0;
  double final_coverage = 0.0;
  /// Step budget ran out before every scheduled level was reached.
  bool truncated = false;
};

/// Robots start on the map border heading roughly inward, follow a goal direction while being
/// pushed away from observed obstacles, and pick a new random direction at map edges or in
/// local minima. Snapshots are emitted the first step coverage reaches each scheduled level.
[[nodiscard]] RolloutResult wander_rollout(const grid::OccupancyGrid& truth, const WanderConfig& config, std::uint64_t seed);

struct DatasetSpec {
  std::filesystem::path out;
  std::uint64_t first_seed = 0;
  int map_count = 1;
  int rollouts_per_map = 1;
  worldgen::TownParams town;
  WanderConfig wander;
};

struct DatasetSummary {
  int maps = 0;
  int snapshots = 0;
  int truncated_rollouts = 0;
};

/// Layout: <out>/map_<seed>/{truth.png,layout.json} and
/// <out>/map_<seed>/rollout_<k>/snap_<pct>{.png,_mask.png,_meta.json}.
/// I/O failures throw std::runtime_error naming the offending path.
DatasetSummary export_dataset(const DatasetSpec& spec);

/// "10", "35", "12.5": file-name label for a coverage level.
[[nodiscard]] std::string coverage_label(double level);

}  // namespace explore::sim

#endif  // EXPLORE_WANDER_HPP
