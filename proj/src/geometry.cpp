#include "explore/geometry.hpp"

#include <algorithm>
#include <limits>

namespace explore {

bool point_in_polygon(std::span<const Vec2> polygon, const Vec2& p) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) {
        inside = !inside;
      }
    }
  }
  return inside;
}

double distance_to_polyline(std::span<const Vec2> points, const Vec2& p) {
  if (points.empty()) {
    return std::numeric_limits<double>::infinity();
  }
  double best = distance(points.front(), p);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const Vec2 a = points[i - 1];
    const Vec2 ab = points[i] - a;
    const double len2 = ab.dot(ab);
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, distance(a + ab * t, p));
  }
  return best;
}

}  // namespace explore
