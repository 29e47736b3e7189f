#include "explore/tasking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "explore/raycast.hpp"

namespace explore::tasking {

using grid::CellIndex;
using grid::CellState;
using grid::OccupancyGrid;

std::string to_string(TaskState state) {
  switch (state) {
    case TaskState::Open:
      return "open";
    case TaskState::Assigned:
      return "assigned";
    case TaskState::Complete:
      return "complete";
    case TaskState::Abandoned:
      return "abandoned";
  }
  return "?";
}

std::string to_string(TaskSource source) { return source == TaskSource::Scatter ? "scatter" : "frontier"; }

double radical_inverse(std::uint64_t index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
    f /= base;
  }
  return result;
}

std::vector<Vec2> halton_points(int count, Vec2 rotation) {
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 1; i <= count; ++i) {
    double x = radical_inverse(static_cast<std::uint64_t>(i), 2) + rotation.x;
    double y = radical_inverse(static_cast<std::uint64_t>(i), 3) + rotation.y;
    out.push_back({x - std::floor(x), y - std::floor(y)});
  }
  return out;
}

std::vector<Task> scatter_tasks(int count, Vec2 lo, Vec2 hi, std::uint64_t seed, int first_id) {
  if (count <= 0) {
    throw std::invalid_argument("scatter_tasks: count must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rx = u(rng);
  const double ry = u(rng);
  std::vector<Task> tasks;
  int id = first_id;
  for (const Vec2& p : halton_points(count, {rx, ry})) {
    Task t;
    t.id = id++;
    t.location = {lo.x + p.x * (hi.x - lo.x), lo.y + p.y * (hi.y - lo.y)};
    t.source = TaskSource::Scatter;
    tasks.push_back(t);
  }
  return tasks;
}

std::vector<Task> scatter_tasks(int count, const OccupancyGrid& map, std::uint64_t seed, int first_id) {
  return scatter_tasks(count, map.origin(), map.origin() + map.extent(), seed, first_id);
}

std::vector<CellIndex> frontier_cells(const OccupancyGrid& observed) {
  std::vector<CellIndex> out;
  constexpr int kDx[4] = {1, -1, 0, 0};
  constexpr int kDy[4] = {0, 0, 1, -1};
  for (int y = 0; y < observed.height(); ++y) {
    for (int x = 0; x < observed.width(); ++x) {
      if (observed.at(x, y) != CellState::Free) {
        continue;
      }
      for (int k = 0; k < 4; ++k) {
        const int nx = x + kDx[k];
        const int ny = y + kDy[k];
        if (observed.contains(nx, ny) && observed.at(nx, ny) == CellState::Unknown) {
          out.push_back({x, y});
          break;
        }
      }
    }
  }
  return out;
}

std::vector<Task> extract_frontiers(const OccupancyGrid& observed, int min_cluster, int first_id) {
  const auto cells = frontier_cells(observed);
  std::vector<std::uint8_t> is_frontier(observed.size(), 0);
  for (const CellIndex& c : cells) {
    is_frontier[observed.index(c.x, c.y)] = 1;
  }
  std::vector<std::uint8_t> seen(observed.size(), 0);
  std::vector<Task> tasks;
  int id = first_id;
  std::vector<CellIndex> stack;
  std::vector<CellIndex> cluster;
  // Row-major seed order keeps the output deterministic.
  for (const CellIndex& seed : cells) {
    const std::size_t si = observed.index(seed.x, seed.y);
    if (seen[si] != 0) {
      continue;
    }
    seen[si] = 1;
    stack.assign(1, seed);
    cluster.clear();
    while (!stack.empty()) {
      const CellIndex c = stack.back();
      stack.pop_back();
      cluster.push_back(c);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = c.x + dx;
          const int ny = c.y + dy;
          if ((dx == 0 && dy == 0) || !observed.contains(nx, ny)) {
            continue;
          }
          const std::size_t ni = observed.index(nx, ny);
          if (is_frontier[ni] != 0 && seen[ni] == 0) {
            seen[ni] = 1;
            stack.push_back({nx, ny});
          }
        }
      }
    }
    if (static_cast<int>(cluster.size()) < min_cluster) {
      continue;
    }
    Vec2 centroid{};
    for (const CellIndex& c : cluster) {
      centroid += observed.cell_center(c);
    }
    centroid = centroid * (1.0 / static_cast<double>(cluster.size()));
    Vec2 location = centroid;
    const auto cell = observed.world_to_cell(centroid);
    if (!cell || observed.at(*cell) != CellState::Free) {
      double best = std::numeric_limits<double>::infinity();
      for (const CellIndex& c : cluster) {
        const double d = distance(observed.cell_center(c), centroid);
        if (d < best) {
          best = d;
          location = observed.cell_center(c);
        }
      }
    }
    Task t;
    t.id = id++;
    t.location = location;
    t.source = TaskSource::Frontier;
    tasks.push_back(t);
  }
  return tasks;
}

std::string to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::Constant:
      return "constant";
    case RewardKind::VisibleEntropy:
      return "visible";
    case RewardKind::GenerativeEntropy:
      return "generative";
  }
  return "?";
}

RewardKind parse_reward_kind(const std::string& name) {
  if (name == "constant") return RewardKind::Constant;
  if (name == "visible" || name == "visible-entropy") return RewardKind::VisibleEntropy;
  if (name == "generative" || name == "generative-entropy") return RewardKind::GenerativeEntropy;
  throw std::invalid_argument("unknown reward policy '" + name + "'");
}

void RewardPolicy::validate() const {
  if (!(constant >= 0.0) || !std::isfinite(constant) || !(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("reward policy: constant must be >= 0 and scale > 0");
  }
  if (!(box_side > 0.0) || !(sensor_radius > 0.0) || rays <= 0) {
    throw std::invalid_argument("reward policy: box side, sensor radius and rays must be positive");
  }
}

double visible_unknown_area(const OccupancyGrid& observed, const Vec2& location, double radius, int rays) {
  // Touched cells are tracked in a small window around the location rather than the whole map.
  const double res = observed.resolution();
  const int span = static_cast<int>(std::ceil(radius / res)) + 2;
  const int side = 2 * span + 1;
  const int cx = static_cast<int>(std::floor((location.x - observed.origin().x) / res));
  const int cy = static_cast<int>(std::floor((location.y - observed.origin().y) / res));
  std::vector<std::uint8_t> counted(static_cast<std::size_t>(side) * static_cast<std::size_t>(side), 0);
  std::size_t unknown = 0;
  for (int k = 0; k < rays; ++k) {
    sim::traverse_ray(observed, location, sim::ray_direction(k, rays), radius, [&](CellIndex c, double) {
      const CellState s = observed.at(c);
      if (s == CellState::Occupied) {
        return false;
      }
      if (s == CellState::Unknown) {
        auto& mark = counted[static_cast<std::size_t>(c.y - cy + span) * static_cast<std::size_t>(side) +
                             static_cast<std::size_t>(c.x - cx + span)];
        if (mark == 0) {
          mark = 1;
          ++unknown;
        }
      }
      return true;
    });
  }
  return static_cast<double>(unknown) * res * res;
}

double reward(const Task& task, const RewardPolicy& policy, const OccupancyGrid& observed, const belief::EntropyField* entropy) {
  switch (policy.kind) {
    case RewardKind::Constant:
      return policy.constant * policy.scale;
    case RewardKind::VisibleEntropy:
      return policy.scale * visible_unknown_area(observed, task.location, policy.sensor_radius, policy.rays);
    case RewardKind::GenerativeEntropy:
      if (entropy == nullptr) {
        throw std::invalid_argument("generative reward needs an entropy field");
      }
      return policy.scale * belief::region_entropy(*entropy, task.location, policy.box_side);
  }
  return 0.0;
}

const Task& TaskRegistry::task(int id) const {
  if (id < 0 || id >= static_cast<int>(tasks_.size())) {
    throw std::out_of_range(fmt::format("no task {}", id));
  }
  return tasks_[static_cast<std::size_t>(id)];
}

Task& TaskRegistry::mutable_task(int id) { return const_cast<Task&>(task(id)); }

void TaskRegistry::log(double time, const Task& task, const char* event, double reward, int winner) {
  events_.push_back({time, task.id, event, task.location, reward, winner});
}

std::vector<int> TaskRegistry::add(std::vector<Task> tasks, double time) {
  std::vector<int> ids;
  for (Task& t : tasks) {
    t.id = next_id();
    t.state = TaskState::Open;
    tasks_.push_back(t);
    ids.push_back(t.id);
    log(time, t, t.source == TaskSource::Scatter ? "scatter" : "frontier", 0.0, -1);
  }
  return ids;
}

std::vector<int> TaskRegistry::add_frontiers(const std::vector<Task>& frontiers, double dedupe_radius, double time) {
  std::vector<Task> fresh;
  for (const Task& f : frontiers) {
    const bool duplicate = std::ranges::any_of(tasks_, [&](const Task& t) {
      return !t.terminal() && distance(t.location, f.location) <= dedupe_radius;
    }) || std::ranges::any_of(fresh, [&](const Task& t) { return distance(t.location, f.location) <= dedupe_radius; });
    if (!duplicate) {
      fresh.push_back(f);
    }
  }
  return add(std::move(fresh), time);
}

void TaskRegistry::assign(int id, int winner, double reward, double time) {
  Task& t = mutable_task(id);
  if (t.terminal()) {
    return;
  }
  t.state = TaskState::Assigned;
  log(time, t, "assign", reward, winner);
}

void TaskRegistry::release(int id, double time) {
  Task& t = mutable_task(id);
  if (t.state != TaskState::Assigned) {
    return;
  }
  t.state = TaskState::Open;
  log(time, t, "release", 0.0, -1);
}

void TaskRegistry::complete(int id, int robot, double time) {
  Task& t = mutable_task(id);
  if (t.terminal()) {
    return;
  }
  t.state = TaskState::Complete;
  log(time, t, "complete", 0.0, robot);
}

void TaskRegistry::abandon(int id, int robot, double time) {
  Task& t = mutable_task(id);
  if (t.terminal()) {
    return;
  }
  t.state = TaskState::Abandoned;
  log(time, t, "abandon", 0.0, robot);
}

std::vector<int> TaskRegistry::live() const {
  std::vector<int> ids;
  for (const Task& t : tasks_) {
    if (!t.terminal()) {
      ids.push_back(t.id);
    }
  }
  return ids;
}

void TaskRegistry::write_log(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << "time,task_id,event,x,y,reward,winner\n";
  for (const TaskEvent& e : events_) {
    out << fmt::format("{:.2f},{},{},{:.3f},{:.3f},{:.6g},{}\n", e.time, e.task_id, e.event, e.location.x, e.location.y, e.reward, e.winner);
  }
}

}  // namespace explore::tasking
