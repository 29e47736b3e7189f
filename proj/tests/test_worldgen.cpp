#include <doctest.h>

#include <numbers>
#include <random>
#include <set>

#include "explore/worldgen.hpp"

using namespace explore;
using namespace explore::worldgen;
using grid::CellState;
using grid::OccupancyGrid;

namespace {

// Independent oracle: test every cell center against the polygon.
std::set<std::pair<int, int>> brute_force_cells(const Polygon& poly, const OccupancyGrid& g) {
  std::set<std::pair<int, int>> out;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      const Vec2 c = g.cell_center(x, y);
      bool inside = false;
      for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        if ((poly[i].y > c.y) != (poly[j].y > c.y) &&
            c.x < poly[i].x + (c.y - poly[i].y) * (poly[j].x - poly[i].x) / (poly[j].y - poly[i].y)) {
          inside = !inside;
        }
      }
      if (inside) {
        out.insert({x, y});
      }
    }
  }
  return out;
}

std::set<std::pair<int, int>> as_set(const std::vector<grid::CellIndex>& cells) {
  std::set<std::pair<int, int>> out;
  for (const auto& c : cells) {
    out.insert({c.x, c.y});
  }
  return out;
}

}  // namespace

TEST_CASE("generate is deterministic per seed") {
  TownParams p;
  p.seed = 1234;
  const auto [layout_a, grid_a] = generate(p);
  const auto [layout_b, grid_b] = generate(p);
  CHECK(grid_a == grid_b);
  CHECK(to_json(layout_a) == to_json(layout_b));
  p.seed = 1235;
  CHECK_FALSE(generate(p).second == grid_a);
}

TEST_CASE("zero buildings gives an all-free map") {
  TownParams p;
  p.building_count = {0, 0};
  const auto [layout, g] = generate(p);
  CHECK(layout.buildings.empty());
  CHECK(g.count(CellState::Free) == g.size());
}

TEST_CASE("axis-aligned rectangle rasterizes to a 20x12 block") {
  OccupancyGrid g(200, 200, 0.5, {}, CellState::Free);
  Building b;
  b.shape = {BuildingType::Rect, 10.0, 6.0};
  b.pose = {{50.0, 50.0}, 0.0};
  REQUIRE(raster_building(b, g));
  CHECK(g.count(CellState::Occupied) == 20 * 12);
  for (int y = 94; y < 106; ++y) {
    for (int x = 90; x < 110; ++x) {
      REQUIRE(g.at(x, y) == CellState::Occupied);
    }
  }
  CHECK(as_set(raster_polygon(footprint(b), g)) == brute_force_cells(footprint(b), g));
}

TEST_CASE("L shape is the rectangle minus its notch") {
  OccupancyGrid g(200, 200, 0.5, {}, CellState::Free);
  Building b;
  b.shape = {BuildingType::LShape, 10.0, 8.0, 0.4, 0.5, 0};
  b.pose = {{50.0, 50.0}, 0.0};
  const auto cells = raster_polygon(footprint(b), g);
  // 20x16 block minus an 8x8 notch.
  CHECK(cells.size() == 20 * 16 - 8 * 8);
  CHECK(as_set(cells) == brute_force_cells(footprint(b), g));
}

TEST_CASE("degenerate shape params are clamped") {
  OccupancyGrid g(100, 100, 0.5, {}, CellState::Free);
  Building b;
  b.shape = {BuildingType::CShape, 0.0, 0.0, 0.0, 5.0, 7};
  b.pose = {{25.0, 25.0}, 0.3};
  REQUIRE(raster_building(b, g));
  CHECK(g.count(CellState::Occupied) > 0);
  const ShapeParams s = clamp_shape(b.shape);
  CHECK(s.width == kMinBuildingDim);
  CHECK(s.notch_depth == 0.8);
  CHECK(s.variant == 3);
}

TEST_CASE("out-of-bounds footprint is rejected") {
  OccupancyGrid g(200, 200, 0.5, {}, CellState::Free);
  Building b;
  b.shape = {BuildingType::Rect, 10.0, 6.0};
  b.pose = {{2.0, 50.0}, 0.0};
  CHECK_FALSE(raster_building(b, g));
  CHECK(g.count(CellState::Occupied) == 0);
}

TEST_CASE("scanline fill equals point-in-polygon on generated footprints") {
  std::mt19937_64 rng(99);
  const OccupancyGrid g(200, 200, 0.5, {}, CellState::Free);
  TownParams p;
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    const StreetCurve street = sample_street(p, rng);
    const Building b = sample_building(p, street, u(rng), i % 2 == 0 ? 1 : -1, rng);
    const Polygon poly = footprint(b);
    REQUIRE(as_set(raster_polygon(poly, g)) == brute_force_cells(poly, g));
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("layout invariants hold across seeds") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    TownParams p;
    p.seed = seed;
    const auto [layout, g] = generate(p);
    CHECK(layout.buildings.size() <= static_cast<std::size_t>(p.building_count.max));
    // Street corridor cells are free.
    const auto corridor = corridor_mask(layout.centerline, p.street_width / 2.0, g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (corridor[i] != 0) {
        REQUIRE(g[i] == CellState::Free);
      }
    }
    // Footprints are in bounds and pairwise disjoint; together they are exactly the occupied set.
    std::set<std::pair<int, int>> all;
    std::size_t total = 0;
    for (const Building& b : layout.buildings) {
      const Polygon poly = footprint(b);
      for (const Vec2& v : poly) {
        REQUIRE(v.x >= 0.0);
        REQUIRE(v.y >= 0.0);
        REQUIRE(v.x <= 100.0);
        REQUIRE(v.y <= 100.0);
      }
      const auto cells = as_set(raster_polygon(poly, g));
      total += cells.size();
      all.insert(cells.begin(), cells.end());
    }
    CHECK(all.size() == total);
    CHECK(all.size() == g.count(CellState::Occupied));
  }
}

TEST_CASE("occupied fraction over many seeds") {
  double sum = 0.0;
  constexpr int kSeeds = 1000;
  for (int seed = 0; seed < kSeeds; ++seed) {
    TownParams p;
    p.seed = static_cast<std::uint64_t>(seed);
    const auto g = generate(p).second;
    sum += static_cast<double>(g.count(CellState::Occupied)) / g.size();
  }
  const double mean = sum / kSeeds;
  MESSAGE("mean occupied fraction " << mean);
  CHECK(mean >= 0.02);
  CHECK(mean <= 0.20);
}

TEST_CASE("street curve geometry") {
  StreetCurve s;
  s.origin = {50.0, 50.0};
  s.heading = std::numbers::pi / 2.0;
  s.c = 0.01;
  CHECK(s.point(0.0) == Vec2{50.0, 50.0});
  const Vec2 n = s.normal(0.0);
  CHECK(n.x == doctest::Approx(-1.0));
  CHECK(n.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.nearest_u(s.point(12.0) + s.normal(12.0) * 3.0) == doctest::Approx(12.0).epsilon(1e-6));
  TownParams bad;
  bad.building_dims = {10.0, 5.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
