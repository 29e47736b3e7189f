#ifndef EXPLORE_GEOMETRY_HPP
#define EXPLORE_GEOMETRY_HPP

#include <cmath>
#include <span>
#include <vector>

namespace explore {

/// Point or vector in world meters.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  [[nodiscard]] double norm() const { return std::hypot(x, y); }
  [[nodiscard]] constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
};

[[nodiscard]] inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

[[nodiscard]] inline Vec2 unit_from_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }

[[nodiscard]] inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

using Polygon = std::vector<Vec2>;

/// Crossing-number containment test. Points exactly on a left/bottom edge count as inside,
/// points on a right/top edge as outside, so adjacent polygons never share a sample.
[[nodiscard]] bool point_in_polygon(std::span<const Vec2> polygon, const Vec2& p);

/// Distance from `p` to the polyline through `points`.
[[nodiscard]] double distance_to_polyline(std::span<const Vec2> points, const Vec2& p);

}  // namespace explore

#endif  // EXPLORE_GEOMETRY_HPP
