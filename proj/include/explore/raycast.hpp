#ifndef EXPLORE_RAYCAST_HPP
#define EXPLORE_RAYCAST_HPP

#include <cmath>
#include <limits>
#include <numbers>

#include "explore/geometry.hpp"
#include "explore/grid.hpp"

namespace explore::sim {

/// Walks the cells pierced by a ray (Amanatides-Woo traversal), starting with the cell that
/// contains `origin`. `visit(cell, entry_distance)` is called in order of entry distance and
/// returns false to stop. Traversal ends at `max_range` or the map border.
template <class Visitor>
void traverse_ray(const grid::OccupancyGrid& g, const Vec2& origin, const Vec2& direction, double max_range, Visitor&& visit) {
  const double res = g.resolution();
  const double fx = (origin.x - g.origin().x) / res;
  const double fy = (origin.y - g.origin().y) / res;
  int x = static_cast<int>(std::floor(fx));
  int y = static_cast<int>(std::floor(fy));
  if (!g.contains(x, y)) {
    return;
  }
  if (!visit(grid::CellIndex{x, y}, 0.0)) {
    return;
  }
  const int step_x = direction.x > 0.0 ? 1 : (direction.x < 0.0 ? -1 : 0);
  const int step_y = direction.y > 0.0 ? 1 : (direction.y < 0.0 ? -1 : 0);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double delta_x = step_x != 0 ? res / std::abs(direction.x) : kInf;
  const double delta_y = step_y != 0 ? res / std::abs(direction.y) : kInf;
  double next_x = kInf;
  double next_y = kInf;
  if (step_x > 0) {
    next_x = ((x + 1) - fx) * res / direction.x;
  } else if (step_x < 0) {
    next_x = (fx - x) * res / -direction.x;
  }
  if (step_y > 0) {
    next_y = ((y + 1) - fy) * res / direction.y;
  } else if (step_y < 0) {
    next_y = (fy - y) * res / -direction.y;
  }
  while (true) {
    double entry = 0.0;
    if (next_x < next_y) {
      entry = next_x;
      x += step_x;
      next_x += delta_x;
    } else {
      entry = next_y;
      y += step_y;
      next_y += delta_y;
    }
    if (entry >= max_range || !g.contains(x, y)) {
      return;
    }
    if (!visit(grid::CellIndex{x, y}, entry)) {
      return;
    }
  }
}

/// Direction of ray `k` out of `count`, offset by half a ray spacing so no ray is axis-aligned.
[[nodiscard]] inline Vec2 ray_direction(int k, int count) {
  return unit_from_angle((k + 0.5) * 2.0 * std::numbers::pi / count);
}

}  // namespace explore::sim

#endif  // EXPLORE_RAYCAST_HPP
