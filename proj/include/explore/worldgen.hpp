#ifndef EXPLORE_WORLDGEN_HPP
#define EXPLORE_WORLDGEN_HPP

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "explore/geometry.hpp"
#include "explore/grid.hpp"

namespace explore::worldgen {

enum class BuildingType : std::uint8_t { Rect, LShape, CShape };

[[nodiscard]] std::string to_string(BuildingType type);
[[nodiscard]] BuildingType building_type_from_string(const std::string& name);

struct Range {
  double min = 0.0;
  double max = 0.0;
};

struct IntRange {
  int min = 0;
  int max = 0;
};

/// Parameters of the town generator. Distances are in meters.
struct TownParams {
  std::uint64_t seed = 0;
  int width_cells = grid::OccupancyGrid::kDefaultSize;
  int height_cells = grid::OccupancyGrid::kDefaultSize;
  double resolution = grid::OccupancyGrid::kDefaultResolution;

  Range street_curvature{-0.012, 0.012};  // 1/m
  double street_width = 8.0;
  /// Max distance of the street's vertex from the map center, per axis.
  double street_center_jitter = 10.0;

  IntRange building_count{3, 9};
  std::vector<BuildingType> building_types{BuildingType::Rect, BuildingType::LShape, BuildingType::CShape};
  Range building_dims{6.0, 20.0};
  /// Gap between the street edge and the street-facing wall.
  Range setback{1.0, 5.0};
  double spacing_jitter = 4.0;
  double angle_jitter = 0.15;  // rad
  /// Minimum clearance kept between two buildings.
  double building_gap = 1.0;
  int retry_budget = 50;

  /// Throws std::invalid_argument on empty ranges or a street wider than the map.
  void validate() const;
};

/// Street centerline: v = a + b*u + c*u^2 in a frame at `origin` whose u axis points along `heading`.
struct StreetCurve {
  Vec2 origin{};
  double heading = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  [[nodiscard]] Vec2 point(double u) const;
  [[nodiscard]] Vec2 tangent(double u) const;
  /// Left-hand unit normal.
  [[nodiscard]] Vec2 normal(double u) const;
  /// Frame coordinates (u, v) of a world point.
  [[nodiscard]] Vec2 to_frame(const Vec2& p) const;
  /// Arc parameter of the nearest centerline point (golden-section refinement around the
  /// frame projection).
  [[nodiscard]] double nearest_u(const Vec2& p) const;
};

struct ShapeParams {
  BuildingType type = BuildingType::Rect;
  double width = 10.0;  // along the street
  double depth = 10.0;  // away from the street
  double notch_width = 0.4;  // fraction of width removed by the L notch or C slot
  double notch_depth = 0.4;  // fraction of depth removed
  int variant = 0;           // L: corner 0..3; C: side 0..3
};

struct Pose {
  Vec2 center{};
  double heading = 0.0;  // direction of the building's width axis
};

struct Building {
  ShapeParams shape;
  Pose pose;
  int side = 1;  // +1 left of the street, -1 right
};

struct TownLayout {
  StreetCurve street;
  double street_width = 8.0;
  std::vector<Vec2> centerline;  // in-map polyline
  std::vector<Building> buildings;
};

inline constexpr double kMinBuildingDim = 2.0;

/// Clamps degenerate dimensions and notch fractions into a drawable range.
[[nodiscard]] ShapeParams clamp_shape(ShapeParams shape);

/// Footprint polygon in world coordinates.
[[nodiscard]] Polygon footprint(const Building& building);

/// Cells whose centers lie inside the polygon, by scanline fill.
[[nodiscard]] std::vector<grid::CellIndex> raster_polygon(const Polygon& polygon, const grid::OccupancyGrid& grid);

/// Marks the footprint Occupied. Returns false and leaves the grid untouched when any vertex of
/// the footprint lies outside the map.
bool raster_building(const Building& building, grid::OccupancyGrid& grid);

/// Samples a street from the prior.
[[nodiscard]] StreetCurve sample_street(const TownParams& params, std::mt19937_64& rng);

/// Centerline polyline sampled every `step` meters, restricted to the map's extent.
[[nodiscard]] std::vector<Vec2> centerline_in_map(const StreetCurve& street, const grid::OccupancyGrid& grid, double step = 1.0);

/// Cells within `half_width` of the polyline.
[[nodiscard]] std::vector<std::uint8_t> corridor_mask(std::span<const Vec2> centerline, double half_width, const grid::OccupancyGrid& grid);

/// Samples one building facing the street at arc position `u` on `side`.
[[nodiscard]] Building sample_building(const TownParams& params, const StreetCurve& street, double u, int side, std::mt19937_64& rng);

/// Bookkeeping for non-overlapping placement on one map.
class PlacementMap {
 public:
  PlacementMap(const grid::OccupancyGrid& like, std::vector<std::uint8_t> corridor, double gap);

  /// Footprint cells if the building is in bounds, avoids the corridor and keeps the gap to
  /// every committed building; empty otherwise.
  [[nodiscard]] std::vector<grid::CellIndex> try_fit(const Building& building) const;
  void commit(std::span<const grid::CellIndex> cells);

  /// Marks cells as blocked for future placements without growing the gap around them.
  void block(std::span<const grid::CellIndex> cells);

 private:
  grid::OccupancyGrid like_;
  std::vector<std::uint8_t> corridor_;
  std::vector<std::uint8_t> blocked_;
  int gap_cells_ = 0;
};

/// Deterministic function of `params`.
[[nodiscard]] std::pair<TownLayout, grid::OccupancyGrid> generate(const TownParams& params);

[[nodiscard]] nlohmann::json to_json(const TownLayout& layout);

}  // namespace explore::worldgen

#endif  // EXPLORE_WORLDGEN_HPP
