#include "explore/worldgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace explore::worldgen {

using grid::CellIndex;
using grid::CellState;
using grid::OccupancyGrid;

std::string to_string(BuildingType type) {
  switch (type) {
    case BuildingType::Rect:
      return "rect";
    case BuildingType::LShape:
      return "l_shape";
    case BuildingType::CShape:
      return "c_shape";
  }
  return "rect";
}

BuildingType building_type_from_string(const std::string& name) {
  if (name == "rect") {
    return BuildingType::Rect;
  }
  if (name == "l_shape" || name == "l") {
    return BuildingType::LShape;
  }
  if (name == "c_shape" || name == "c") {
    return BuildingType::CShape;
  }
  throw std::invalid_argument("unknown building type '" + name + "'");
}

void TownParams::validate() const {
  auto check = [](bool ok, const char* message) {
    if (!ok) {
      throw std::invalid_argument(message);
    }
  };
  check(width_cells > 0 && height_cells > 0, "town params: map dimensions must be positive");
  check(resolution > 0.0, "town params: resolution must be positive");
  check(street_curvature.min <= street_curvature.max, "town params: empty street curvature range");
  check(building_count.min >= 0 && building_count.min <= building_count.max, "town params: invalid building count range");
  check(building_dims.min <= building_dims.max, "town params: empty building dimension range");
  check(setback.min <= setback.max, "town params: empty setback range");
  check(!building_types.empty(), "town params: no building types");
  check(street_width > 0.0, "town params: street width must be positive");
  check(
      street_width < std::min(width_cells, height_cells) * resolution,
      "town params: street wider than the map");
  check(spacing_jitter >= 0.0 && angle_jitter >= 0.0, "town params: jitter must be non-negative");
  check(retry_budget > 0, "town params: retry budget must be positive");
}

Vec2 StreetCurve::point(double u) const {
  const double v = a + b * u + c * u * u;
  return origin + rotate(Vec2{u, v}, heading);
}

Vec2 StreetCurve::tangent(double u) const {
  const Vec2 d{1.0, b + 2.0 * c * u};
  return rotate(d * (1.0 / d.norm()), heading);
}

Vec2 StreetCurve::normal(double u) const {
  const Vec2 t = tangent(u);
  return {-t.y, t.x};
}

Vec2 StreetCurve::to_frame(const Vec2& p) const { return rotate(p - origin, -heading); }

double StreetCurve::nearest_u(const Vec2& p) const {
  const double u0 = to_frame(p).x;
  auto dist2 = [&](double u) {
    const Vec2 d = point(u) - p;
    return d.dot(d);
  };
  double best_u = u0;
  double best = dist2(u0);
  for (double du = -60.0; du <= 60.0; du += 1.0) {
    const double d = dist2(u0 + du);
    if (d < best) {
      best = d;
      best_u = u0 + du;
    }
  }
  double lo = best_u - 1.0;
  double hi = best_u + 1.0;
  for (int it = 0; it < 40; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (dist2(m1) < dist2(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return 0.5 * (lo + hi);
}

ShapeParams clamp_shape(ShapeParams shape) {
  shape.width = std::max(shape.width, kMinBuildingDim);
  shape.depth = std::max(shape.depth, kMinBuildingDim);
  shape.notch_width = std::clamp(shape.notch_width, 0.2, 0.8);
  shape.notch_depth = std::clamp(shape.notch_depth, 0.2, 0.8);
  shape.variant = ((shape.variant % 4) + 4) % 4;
  return shape;
}

namespace {

Polygon local_outline(const ShapeParams& s) {
  const double hw = s.width / 2.0;
  const double hd = s.depth / 2.0;
  switch (s.type) {
    case BuildingType::Rect:
      return {{-hw, -hd}, {hw, -hd}, {hw, hd}, {-hw, hd}};
    case BuildingType::LShape: {
      // Notch cut from the (+x, +y) corner, then mirrored into the chosen corner.
      const double nx = hw - s.notch_width * s.width;
      const double ny = hd - s.notch_depth * s.depth;
      Polygon poly{{-hw, -hd}, {hw, -hd}, {hw, ny}, {nx, ny}, {nx, hd}, {-hw, hd}};
      const double sx = (s.variant & 1) != 0 ? -1.0 : 1.0;
      const double sy = (s.variant & 2) != 0 ? -1.0 : 1.0;
      for (Vec2& p : poly) {
        p = {p.x * sx, p.y * sy};
      }
      return poly;
    }
    case BuildingType::CShape: {
      // Slot opening on the +y side, then rotated onto the chosen side.
      const double sw = s.notch_width * s.width / 2.0;
      const double sy = hd - s.notch_depth * s.depth;
      Polygon poly{{-hw, -hd}, {hw, -hd}, {hw, hd}, {sw, hd}, {sw, sy}, {-sw, sy}, {-sw, hd}, {-hw, hd}};
      switch (s.variant) {
        case 1:
          for (Vec2& p : poly) {
            p = {p.x, -p.y};
          }
          break;
        case 2:
        case 3: {
          // Slot on a short side: swap roles of the axes, keeping the outer box.
          const double rx = hw;
          const double ry = hd;
          const double sh = s.notch_width * s.depth / 2.0;
          const double sx = rx - s.notch_depth * s.width;
          poly = {{-rx, -ry}, {rx, -ry}, {rx, -sh}, {sx, -sh}, {sx, sh}, {rx, sh}, {rx, ry}, {-rx, ry}};
          if (s.variant == 3) {
            for (Vec2& p : poly) {
              p = {-p.x, p.y};
            }
          }
          break;
        }
        default:
          break;
      }
      return poly;
    }
  }
  return {};
}

}  // namespace

Polygon footprint(const Building& building) {
  const ShapeParams shape = clamp_shape(building.shape);
  Polygon poly = local_outline(shape);
  for (Vec2& p : poly) {
    p = building.pose.center + rotate(p, building.pose.heading);
  }
  return poly;
}

std::vector<CellIndex> raster_polygon(const Polygon& polygon, const OccupancyGrid& grid) {
  std::vector<CellIndex> cells;
  if (polygon.size() < 3) {
    return cells;
  }
  double min_y = polygon.front().y;
  double max_y = min_y;
  for (const Vec2& p : polygon) {
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double res = grid.resolution();
  const Vec2 origin = grid.origin();
  const int row_lo = std::max(0, static_cast<int>(std::floor((min_y - origin.y) / res - 0.5)));
  const int row_hi = std::min(grid.height() - 1, static_cast<int>(std::ceil((max_y - origin.y) / res - 0.5)));
  std::vector<double> crossings;
  const std::size_t n = polygon.size();
  for (int row = row_lo; row <= row_hi; ++row) {
    const double py = grid.cell_center(0, row).y;
    crossings.clear();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Vec2& a = polygon[i];
      const Vec2& b = polygon[j];
      if ((a.y > py) != (b.y > py)) {
        crossings.push_back(a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      const double x0 = crossings[k];
      const double x1 = crossings[k + 1];
      const int col_lo = std::max(0, static_cast<int>(std::floor((x0 - origin.x) / res - 0.5)) - 1);
      const int col_hi = std::min(grid.width() - 1, static_cast<int>(std::ceil((x1 - origin.x) / res - 0.5)) + 1);
      for (int col = col_lo; col <= col_hi; ++col) {
        const double px = grid.cell_center(col, row).x;
        if (px >= x0 && px < x1) {
          cells.push_back({col, row});
        }
      }
    }
  }
  return cells;
}

namespace {

bool footprint_in_bounds(const Polygon& poly, const OccupancyGrid& grid) {
  const Vec2 lo = grid.origin();
  const Vec2 hi = lo + grid.extent();
  return std::all_of(poly.begin(), poly.end(), [&](const Vec2& p) {
    return p.x >= lo.x && p.y >= lo.y && p.x <= hi.x && p.y <= hi.y;
  });
}

}  // namespace

bool raster_building(const Building& building, OccupancyGrid& grid) {
  const Polygon poly = footprint(building);
  if (!footprint_in_bounds(poly, grid)) {
    return false;
  }
  for (const CellIndex& c : raster_polygon(poly, grid)) {
    grid.set(c, CellState::Occupied);
  }
  return true;
}

StreetCurve sample_street(const TownParams& params, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> heading(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> jitter(-params.street_center_jitter, params.street_center_jitter);
  std::uniform_real_distribution<double> curvature(params.street_curvature.min, params.street_curvature.max);
  StreetCurve street;
  const Vec2 center{params.width_cells * params.resolution / 2.0, params.height_cells * params.resolution / 2.0};
  street.heading = heading(rng);
  const double jx = jitter(rng);
  const double jy = jitter(rng);
  street.origin = center + Vec2{jx, jy};
  street.c = curvature(rng) / 2.0;
  return street;
}

std::vector<Vec2> centerline_in_map(const StreetCurve& street, const OccupancyGrid& grid, double step) {
  const Vec2 e = grid.extent();
  const double reach = 2.0 * std::hypot(e.x, e.y);
  const Vec2 u_center = street.to_frame(grid.origin() + e * 0.5);
  std::vector<Vec2> points;
  for (double u = u_center.x - reach; u <= u_center.x + reach; u += step) {
    const Vec2 p = street.point(u);
    if (grid.contains_point(p)) {
      points.push_back(p);
    } else if (!points.empty()) {
      // keep one point beyond the edge so the corridor reaches the border
      points.push_back(p);
      break;
    } else if (grid.contains_point(street.point(u + step))) {
      points.push_back(p);
    }
  }
  return points;
}

std::vector<std::uint8_t> corridor_mask(std::span<const Vec2> centerline, double half_width, const OccupancyGrid& grid) {
  std::vector<std::uint8_t> mask(grid.size(), 0);
  const double res = grid.resolution();
  const Vec2 origin = grid.origin();
  for (std::size_t i = 0; i + 1 < centerline.size(); ++i) {
    const Vec2 a = centerline[i];
    const Vec2 b = centerline[i + 1];
    const int x_lo = std::max(0, static_cast<int>(std::floor((std::min(a.x, b.x) - half_width - origin.x) / res)));
    const int x_hi = std::min(grid.width() - 1, static_cast<int>(std::floor((std::max(a.x, b.x) + half_width - origin.x) / res)));
    const int y_lo = std::max(0, static_cast<int>(std::floor((std::min(a.y, b.y) - half_width - origin.y) / res)));
    const int y_hi = std::min(grid.height() - 1, static_cast<int>(std::floor((std::max(a.y, b.y) + half_width - origin.y) / res)));
    const std::array<Vec2, 2> segment{a, b};
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        const std::size_t idx = grid.index(x, y);
        if (mask[idx] == 0 && distance_to_polyline(segment, grid.cell_center(x, y)) <= half_width) {
          mask[idx] = 1;
        }
      }
    }
  }
  return mask;
}

Building sample_building(const TownParams& params, const StreetCurve& street, double u, int side, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> type_pick(0, params.building_types.size() - 1);
  std::uniform_real_distribution<double> dims(params.building_dims.min, params.building_dims.max);
  std::uniform_real_distribution<double> notch(0.3, 0.6);
  std::uniform_int_distribution<int> variant(0, 3);
  std::uniform_real_distribution<double> setback(params.setback.min, params.setback.max);
  std::uniform_real_distribution<double> angle(-params.angle_jitter, params.angle_jitter);

  Building b;
  b.side = side;
  b.shape.type = params.building_types[type_pick(rng)];
  b.shape.width = dims(rng);
  b.shape.depth = dims(rng);
  b.shape.notch_width = notch(rng);
  b.shape.notch_depth = notch(rng);
  b.shape.variant = variant(rng);
  const double offset = params.street_width / 2.0 + setback(rng) + b.shape.depth / 2.0;
  const Vec2 t = street.tangent(u);
  b.pose.center = street.point(u) + street.normal(u) * (offset * side);
  b.pose.heading = std::atan2(t.y, t.x) + angle(rng);
  return b;
}

PlacementMap::PlacementMap(const OccupancyGrid& like, std::vector<std::uint8_t> corridor, double gap)
    : like_{like.width(), like.height(), like.resolution(), like.origin(), CellState::Free},
      corridor_{std::move(corridor)},
      blocked_(like.size(), 0),
      gap_cells_{static_cast<int>(std::ceil(gap / like.resolution()))} {
  if (corridor_.size() != like.size()) {
    throw grid::DimensionMismatch("placement map: corridor mask does not match the grid");
  }
}

std::vector<CellIndex> PlacementMap::try_fit(const Building& building) const {
  const Polygon poly = footprint(building);
  if (!footprint_in_bounds(poly, like_)) {
    return {};
  }
  std::vector<CellIndex> cells = raster_polygon(poly, like_);
  for (const CellIndex& c : cells) {
    const std::size_t idx = like_.index(c.x, c.y);
    if (corridor_[idx] != 0 || blocked_[idx] != 0) {
      return {};
    }
  }
  return cells;
}

void PlacementMap::commit(std::span<const CellIndex> cells) {
  for (const CellIndex& c : cells) {
    for (int dy = -gap_cells_; dy <= gap_cells_; ++dy) {
      for (int dx = -gap_cells_; dx <= gap_cells_; ++dx) {
        if (like_.contains(c.x + dx, c.y + dy)) {
          blocked_[like_.index(c.x + dx, c.y + dy)] = 1;
        }
      }
    }
  }
}

void PlacementMap::block(std::span<const CellIndex> cells) {
  for (const CellIndex& c : cells) {
    blocked_[like_.index(c.x, c.y)] = 1;
  }
}

std::pair<TownLayout, OccupancyGrid> generate(const TownParams& params) {
  params.validate();
  std::mt19937_64 rng(params.seed);
  OccupancyGrid truth(params.width_cells, params.height_cells, params.resolution, {}, CellState::Free);

  TownLayout layout;
  layout.street = sample_street(params, rng);
  layout.street_width = params.street_width;
  layout.centerline = centerline_in_map(layout.street, truth);
  PlacementMap placement(truth, corridor_mask(layout.centerline, params.street_width / 2.0, truth), params.building_gap);

  std::uniform_int_distribution<int> count_pick(params.building_count.min, params.building_count.max);
  const int count = count_pick(rng);
  if (count == 0 || layout.centerline.size() < 2) {
    return {layout, truth};
  }

  const double u_first = layout.street.to_frame(layout.centerline.front()).x;
  const double u_last = layout.street.to_frame(layout.centerline.back()).x;
  const double u_lo = std::min(u_first, u_last);
  const double u_span = std::abs(u_last - u_first);

  std::bernoulli_distribution coin(0.5);
  const int first_side = coin(rng) ? 1 : -1;
  const std::array<int, 2> per_side{(count + 1) / 2, count / 2};
  std::uniform_real_distribution<double> jitter(-params.spacing_jitter, params.spacing_jitter);

  for (int k = 0; k < count; ++k) {
    const int side_slot = k % 2;
    const int side = side_slot == 0 ? first_side : -first_side;
    const int slot = k / 2;
    const double spacing = u_span / per_side[static_cast<std::size_t>(side_slot)];
    const double u_nominal = u_lo + (slot + 0.5) * spacing;
    for (int attempt = 0; attempt < params.retry_budget; ++attempt) {
      const Building candidate = sample_building(params, layout.street, u_nominal + jitter(rng), side, rng);
      const std::vector<CellIndex> cells = placement.try_fit(candidate);
      if (cells.empty()) {
        continue;
      }
      placement.commit(cells);
      for (const CellIndex& c : cells) {
        truth.set(c, CellState::Occupied);
      }
      layout.buildings.push_back(candidate);
      break;
    }
  }
  return {layout, truth};
}

nlohmann::json to_json(const TownLayout& layout) {
  nlohmann::json j;
  j["street"] = {
      {"origin", {layout.street.origin.x, layout.street.origin.y}},
      {"heading", layout.street.heading},
      {"coefficients", {layout.street.a, layout.street.b, layout.street.c}},
      {"width", layout.street_width},
  };
  nlohmann::json line = nlohmann::json::array();
  for (const Vec2& p : layout.centerline) {
    line.push_back({p.x, p.y});
  }
  j["street"]["polyline"] = std::move(line);
  nlohmann::json buildings = nlohmann::json::array();
  for (const Building& b : layout.buildings) {
    nlohmann::json outline = nlohmann::json::array();
    for (const Vec2& p : footprint(b)) {
      outline.push_back({p.x, p.y});
    }
    buildings.push_back({
        {"type", to_string(b.shape.type)},
        {"center", {b.pose.center.x, b.pose.center.y}},
        {"heading", b.pose.heading},
        {"side", b.side},
        {"width", b.shape.width},
        {"depth", b.shape.depth},
        {"notch_width", b.shape.notch_width},
        {"notch_depth", b.shape.notch_depth},
        {"variant", b.shape.variant},
        {"footprint", std::move(outline)},
    });
  }
  j["buildings"] = std::move(buildings);
  return j;
}

}  // namespace explore::worldgen
