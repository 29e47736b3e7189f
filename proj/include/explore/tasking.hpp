#ifndef EXPLORE_TASKING_HPP
#define EXPLORE_TASKING_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "explore/belief.hpp"
#include "explore/geometry.hpp"
#include "explore/grid.hpp"

namespace explore::tasking {

enum class TaskState : std::uint8_t { Open, Assigned, Complete, Abandoned };
enum class TaskSource : std::uint8_t { Scatter, Frontier };

struct Task {
  int id = 0;
  Vec2 location{};
  TaskState state = TaskState::Open;
  TaskSource source = TaskSource::Scatter;

  [[nodiscard]] bool terminal() const { return state == TaskState::Complete || state == TaskState::Abandoned; }
};

[[nodiscard]] std::string to_string(TaskState state);
[[nodiscard]] std::string to_string(TaskSource source);

/// Van der Corput radical inverse of `index` in `base`.
[[nodiscard]] double radical_inverse(std::uint64_t index, int base);

/// Halton points (bases 2, 3) in the unit square, starting at index 1, each shifted by
/// `rotation` modulo 1. A zero rotation gives (1/2, 1/3), (1/4, 2/3), ...
[[nodiscard]] std::vector<Vec2> halton_points(int count, Vec2 rotation = {});

/// `count` tasks spread over [lo, hi] by a Halton sequence with a seeded Cranley-Patterson
/// rotation. Ids run from `first_id`.
[[nodiscard]] std::vector<Task> scatter_tasks(int count, Vec2 lo, Vec2 hi, std::uint64_t seed, int first_id = 0);
/// Same, covering the whole map.
[[nodiscard]] std::vector<Task> scatter_tasks(int count, const grid::OccupancyGrid& map, std::uint64_t seed, int first_id = 0);

/// Free cells with at least one 4-neighbour Unknown.
[[nodiscard]] std::vector<grid::CellIndex> frontier_cells(const grid::OccupancyGrid& observed);

/// One task per 8-connected frontier cluster of at least `min_cluster` cells, placed at the
/// cluster centroid, or at the nearest cluster cell when the centroid is not Free.
[[nodiscard]] std::vector<Task> extract_frontiers(const grid::OccupancyGrid& observed, int min_cluster = 5, int first_id = 0);

enum class RewardKind : std::uint8_t { Constant, VisibleEntropy, GenerativeEntropy };

[[nodiscard]] std::string to_string(RewardKind kind);
/// Accepts "constant", "visible" and "generative" (and the long forms "visible-entropy" ...).
[[nodiscard]] RewardKind parse_reward_kind(const std::string& name);

struct RewardPolicy {
  RewardKind kind = RewardKind::Constant;
  double constant = 1.0;
  double box_side = 10.0;       // m, generative box
  double sensor_radius = 10.0;  // m, visible-entropy range
  int rays = 360;
  double scale = 1.0;

  void validate() const;
};

/// Area (m^2) of Unknown cells reached by rays from `location` within `radius`. Rays stop at
/// observed Occupied cells and pass through Unknown ones; each cell counts once.
[[nodiscard]] double visible_unknown_area(const grid::OccupancyGrid& observed, const Vec2& location, double radius, int rays);

/// Pre-discount reward c_j. `entropy` is only read by the generative policy.
[[nodiscard]] double reward(
    const Task& task,
    const RewardPolicy& policy,
    const grid::OccupancyGrid& observed,
    const belief::EntropyField* entropy);

struct TaskEvent {
  double time = 0.0;
  int task_id = 0;
  std::string event;
  Vec2 location{};
  double reward = 0.0;
  int winner = -1;  // -1: none
};

/// Owns the task set of a trial and the log of everything that happened to it.
class TaskRegistry {
 public:
  [[nodiscard]] const std::vector<Task>& tasks() const { return tasks_; }
  [[nodiscard]] const Task& task(int id) const;
  [[nodiscard]] const std::vector<TaskEvent>& events() const { return events_; }
  [[nodiscard]] int next_id() const { return static_cast<int>(tasks_.size()); }

  /// Adds tasks, renumbering them from next_id(). Returns the ids given.
  std::vector<int> add(std::vector<Task> tasks, double time);
  /// Adds the frontier tasks that are more than `dedupe_radius` from every live task.
  std::vector<int> add_frontiers(const std::vector<Task>& frontiers, double dedupe_radius, double time);

  void assign(int id, int winner, double reward, double time);
  /// Back to Open (lost in a re-auction).
  void release(int id, double time);
  void complete(int id, int robot, double time);
  void abandon(int id, int robot, double time);

  /// Ids of tasks that are Open or Assigned.
  [[nodiscard]] std::vector<int> live() const;

  void write_log(const std::filesystem::path& path) const;

 private:
  Task& mutable_task(int id);
  void log(double time, const Task& task, const char* event, double reward, int winner);

  std::vector<Task> tasks_;  // index == id
  std::vector<TaskEvent> events_;
};

}  // namespace explore::tasking

#endif  // EXPLORE_TASKING_HPP
