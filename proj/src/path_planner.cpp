#include "explore/path_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace explore::sim {

using grid::CellIndex;
using grid::CellState;
using grid::OccupancyGrid;

std::vector<std::uint8_t> blocked_cells(const OccupancyGrid& observed, int inflation) {
  std::vector<std::uint8_t> blocked(observed.size(), 0);
  for (int y = 0; y < observed.height(); ++y) {
    for (int x = 0; x < observed.width(); ++x) {
      if (observed.at(x, y) != CellState::Occupied) {
        continue;
      }
      for (int dy = -inflation; dy <= inflation; ++dy) {
        for (int dx = -inflation; dx <= inflation; ++dx) {
          if (observed.contains(x + dx, y + dy)) {
            blocked[observed.index(x + dx, y + dy)] = 1;
          }
        }
      }
    }
  }
  return blocked;
}

std::optional<std::vector<CellIndex>> plan_path(const OccupancyGrid& observed, CellIndex start, CellIndex goal, int inflation) {
  return plan_path(observed, blocked_cells(observed, inflation), start, goal);
}

std::optional<std::vector<CellIndex>> plan_path(
    const OccupancyGrid& observed,
    const std::vector<std::uint8_t>& blocked,
    CellIndex start,
    CellIndex goal) {
  if (!observed.contains(start) || !observed.contains(goal)) {
    return std::nullopt;
  }
  if (observed.at(goal) == CellState::Occupied) {
    return std::nullopt;
  }
  const std::size_t start_idx = observed.index(start.x, start.y);
  const std::size_t goal_idx = observed.index(goal.x, goal.y);
  if (start_idx == goal_idx) {
    return std::vector<CellIndex>{start};
  }
  auto passable = [&](int x, int y) {
    const std::size_t idx = observed.index(x, y);
    return blocked[idx] == 0 || idx == goal_idx || idx == start_idx;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double kDiag = std::sqrt(2.0);
  auto heuristic = [&](int x, int y) {
    const int dx = std::abs(x - goal.x);
    const int dy = std::abs(y - goal.y);
    return (kDiag - 1.0) * std::min(dx, dy) + std::max(dx, dy);
  };

  std::vector<double> cost(observed.size(), kInf);
  std::vector<std::int32_t> parent(observed.size(), -1);
  std::vector<std::uint8_t> closed(observed.size(), 0);
  using Entry = std::pair<double, std::size_t>;  // (f, index); index breaks ties deterministically
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  cost[start_idx] = 0.0;
  open.push({heuristic(start.x, start.y), start_idx});

  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  while (!open.empty()) {
    const auto [f, idx] = open.top();
    open.pop();
    if (closed[idx] != 0) {
      continue;
    }
    closed[idx] = 1;
    if (idx == goal_idx) {
      break;
    }
    const CellIndex c = observed.cell_of_index(idx);
    for (int k = 0; k < 8; ++k) {
      const int nx = c.x + kDx[k];
      const int ny = c.y + kDy[k];
      if (!observed.contains(nx, ny) || !passable(nx, ny)) {
        continue;
      }
      const bool diagonal = k >= 4;
      if (diagonal && (!passable(c.x + kDx[k], c.y) || !passable(c.x, c.y + kDy[k]))) {
        continue;
      }
      const std::size_t n_idx = observed.index(nx, ny);
      const double g = cost[idx] + (diagonal ? kDiag : 1.0);
      if (g < cost[n_idx]) {
        cost[n_idx] = g;
        parent[n_idx] = static_cast<std::int32_t>(idx);
        open.push({g + heuristic(nx, ny), n_idx});
      }
    }
  }
  if (closed[goal_idx] == 0) {
    return std::nullopt;
  }
  std::vector<CellIndex> path;
  for (std::int32_t at = static_cast<std::int32_t>(goal_idx); at >= 0; at = parent[static_cast<std::size_t>(at)]) {
    path.push_back(observed.cell_of_index(static_cast<std::size_t>(at)));
  }
  std::reverse(path.begin(), path.end());
  return path;
}

double path_length(const std::vector<CellIndex>& path, double resolution) {
  double length = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    length += std::hypot(path[i].x - path[i - 1].x, path[i].y - path[i - 1].y) * resolution;
  }
  return length;
}

}  // namespace explore::sim
