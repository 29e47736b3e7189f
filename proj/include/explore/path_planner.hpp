#ifndef EXPLORE_PATH_PLANNER_HPP
#define EXPLORE_PATH_PLANNER_HPP

#include <optional>
#include <vector>

#include "explore/grid.hpp"

namespace explore::sim {

/// Cells a robot may not enter: observed Occupied cells dilated by `inflation` cells
/// (Chebyshev). Unknown cells stay traversable.
[[nodiscard]] std::vector<std::uint8_t> blocked_cells(const grid::OccupancyGrid& observed, int inflation);

/// Shortest 8-connected path from `start` to `goal` (both included) with unit/sqrt(2) step
/// costs. Diagonal moves may not cut a blocked corner. The start cell is always enterable;
/// the goal cell may sit inside the inflation margin but not on an observed obstacle.
/// Returns nullopt when the goal cannot be reached.
[[nodiscard]] std::optional<std::vector<grid::CellIndex>> plan_path(
    const grid::OccupancyGrid& observed,
    grid::CellIndex start,
    grid::CellIndex goal,
    int inflation = 1);

/// Same search against a precomputed blocked mask.
[[nodiscard]] std::optional<std::vector<grid::CellIndex>> plan_path(
    const grid::OccupancyGrid& observed,
    const std::vector<std::uint8_t>& blocked,
    grid::CellIndex start,
    grid::CellIndex goal);

/// Length of a cell path in meters.
[[nodiscard]] double path_length(const std::vector<grid::CellIndex>& path, double resolution);

}  // namespace explore::sim

#endif  // EXPLORE_PATH_PLANNER_HPP
