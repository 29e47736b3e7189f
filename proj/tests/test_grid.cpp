#include <doctest.h>

#include <filesystem>
#include <random>

#include "explore/grid.hpp"
#include "explore/image_io.hpp"

using namespace explore::grid;

namespace {

OccupancyGrid random_grid(std::mt19937_64& rng, int w, int h, bool allow_unknown) {
  OccupancyGrid g(w, h);
  std::uniform_int_distribution<int> pick(0, allow_unknown ? 2 : 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = static_cast<CellState>(pick(rng));
  }
  return g;
}

}  // namespace

TEST_CASE("encode maps single-class grids") {
  OccupancyGrid free_grid(4, 3, 0.5, {}, CellState::Free);
  const GridImage a = encode(free_grid);
  CHECK(std::all_of(a.pixels.begin(), a.pixels.end(), [](auto p) { return p == 255; }));
  CHECK(std::all_of(a.mask.begin(), a.mask.end(), [](auto m) { return m == 0; }));

  OccupancyGrid unknown_grid(4, 3);
  const GridImage b = encode(unknown_grid);
  CHECK(std::all_of(b.pixels.begin(), b.pixels.end(), [](auto p) { return p == 127; }));
  CHECK(std::all_of(b.mask.begin(), b.mask.end(), [](auto m) { return m == 1; }));
}

TEST_CASE("encode mixed 2x2 grid") {
  OccupancyGrid g(2, 2);
  g.set(0, 0, CellState::Occupied);
  g.set(1, 0, CellState::Free);
  g.set(0, 1, CellState::Unknown);
  g.set(1, 1, CellState::Free);
  const GridImage img = encode(g);
  CHECK(img.pixels == std::vector<std::uint8_t>{0, 255, 127, 255});
  CHECK(img.mask == std::vector<std::uint8_t>{0, 0, 1, 0});
}

TEST_CASE("decode thresholds") {
  GridImage img{3, 1, {126, 128, 127}, {0, 0, 1}};
  const OccupancyGrid g = decode(img);
  CHECK(g.at(0, 0) == CellState::Occupied);
  CHECK(g.at(1, 0) == CellState::Free);
  CHECK(g.at(2, 0) == CellState::Unknown);

  // Wider dead band.
  const OccupancyGrid h = decode(img, DecodeThresholds{100, 150});
  CHECK(h.at(0, 0) == CellState::Unknown);
  CHECK(h.at(1, 0) == CellState::Unknown);
}

TEST_CASE("decode of a noisy prediction agrees with the scalar threshold rule") {
  std::mt19937_64 rng(7);
  GridImage img{20, 10, std::vector<std::uint8_t>(200), std::vector<std::uint8_t>(200, 0)};
  std::uniform_int_distribution<int> px(0, 255);
  for (auto& p : img.pixels) {
    p = static_cast<std::uint8_t>(px(rng));
  }
  img.pixels[17] = 40;
  const DecodeThresholds t{90, 170};
  const OccupancyGrid g = decode(img, t);
  CHECK(g[17] == CellState::Occupied);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int p = img.pixels[i];
    const CellState expected = p < 90 ? CellState::Occupied : (p > 170 ? CellState::Free : CellState::Unknown);
    REQUIRE(g[i] == expected);
  }
}

TEST_CASE("decode rejects mismatched dimensions") {
  GridImage img{3, 3, std::vector<std::uint8_t>(8, 0), {}};
  CHECK_THROWS_AS((void)decode(img), DimensionMismatch);
  GridImage ok{3, 3, std::vector<std::uint8_t>(9, 0), {}};
  CHECK_THROWS_AS((void)decode(ok, OccupancyGrid(4, 3)), DimensionMismatch);
}

TEST_CASE("codec round trip property") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const OccupancyGrid g = random_grid(rng, 1 + trial % 17, 1 + trial % 13, true);
    const GridImage img = encode(g);
    REQUIRE(decode(img) == g);
    REQUIRE(encode(decode(img)) == img);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      REQUIRE((img.mask[i] == 1) == (img.pixels[i] == 127));
    }
  }
}

TEST_CASE("accuracy") {
  std::mt19937_64 rng(3);
  const OccupancyGrid truth = random_grid(rng, 20, 20, false);
  CHECK(accuracy(truth, truth, false) == 1.0);
  CHECK(accuracy(truth, truth, true) == 1.0);

  OccupancyGrid unknown(20, 20);
  CHECK(accuracy(unknown, truth, true) == 0.5);
  CHECK(accuracy(unknown, truth, false) == 0.0);

  SUBCASE("ninety percent free map") {
    OccupancyGrid t(10, 10, 0.5, {}, CellState::Free);
    for (int x = 0; x < 10; ++x) {
      t.set(x, 4, CellState::Occupied);
    }
    const OccupancyGrid all_free(10, 10, 0.5, {}, CellState::Free);
    std::size_t matches = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      matches += all_free[i] == t[i] ? 1 : 0;
    }
    CHECK(accuracy(all_free, t, false) == doctest::Approx(static_cast<double>(matches) / 100.0));
    CHECK(accuracy(all_free, t, false) == doctest::Approx(0.9));
  }

  SUBCASE("half credit adds half the unknown fraction") {
    for (int k = 0; k < 50; ++k) {
      const OccupancyGrid p = random_grid(rng, 20, 20, true);
      const double unknown_fraction = static_cast<double>(p.count(CellState::Unknown)) / p.size();
      const double with = accuracy(p, truth, true);
      const double without = accuracy(p, truth, false);
      REQUIRE(with == doctest::Approx(without + 0.5 * unknown_fraction).epsilon(1e-12));
      REQUIRE(with >= 0.0);
      REQUIRE(with <= 1.0);
    }
  }

  CHECK_THROWS_AS((void)accuracy(OccupancyGrid(3, 3), truth, true), DimensionMismatch);
}

TEST_CASE("error map labels") {
  std::mt19937_64 rng(5);
  const OccupancyGrid truth = random_grid(rng, 30, 20, false);
  const ErrorMap same = error_map(truth, truth);
  CHECK(same.count(ErrorLabel::WrongFree) == 0);
  CHECK(same.count(ErrorLabel::WrongOccupied) == 0);
  CHECK(same.count(ErrorLabel::CorrectFree) + same.count(ErrorLabel::CorrectOccupied) == truth.size());

  OccupancyGrid t(1, 1, 0.5, {}, CellState::Occupied);
  OccupancyGrid p(1, 1, 0.5, {}, CellState::Free);
  CHECK(error_map(p, t).labels[0] == ErrorLabel::WrongFree);
  CHECK(error_map(t, p).labels[0] == ErrorLabel::WrongOccupied);

  const OccupancyGrid predicted = random_grid(rng, 30, 20, false);
  const ErrorMap em = error_map(predicted, truth);
  std::size_t cf = 0, co = 0, wf = 0, wo = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == truth[i]) {
      (truth[i] == CellState::Free ? cf : co)++;
    } else {
      (predicted[i] == CellState::Free ? wf : wo)++;
    }
  }
  CHECK(em.count(ErrorLabel::CorrectFree) == cf);
  CHECK(em.count(ErrorLabel::CorrectOccupied) == co);
  CHECK(em.count(ErrorLabel::WrongFree) == wf);
  CHECK(em.count(ErrorLabel::WrongOccupied) == wo);
  CHECK(cf + co + wf + wo == truth.size());

  const auto rgb = render_error_map(error_map(p, t));
  CHECK(rgb == std::vector<std::uint8_t>{0, 255, 0});
  CHECK_THROWS_AS((void)error_map(OccupancyGrid(2, 2), truth), DimensionMismatch);
}

TEST_CASE("world coordinates") {
  OccupancyGrid g(200, 200);
  CHECK(g.extent() == explore::Vec2{100.0, 100.0});
  CHECK(g.world_to_cell({0.26, 99.9}) == CellIndex{0, 199});
  CHECK_FALSE(g.world_to_cell({100.0, 5.0}).has_value());
  CHECK(g.cell_center(3, 4) == explore::Vec2{1.75, 2.25});
  CHECK_THROWS((void)OccupancyGrid(0, 3));
}

TEST_CASE("png round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "explore_test_grid_png";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(9);
  const OccupancyGrid g = random_grid(rng, 37, 23, true);
  explore::image_io::write_grid_png(dir / "g.png", g);
  explore::image_io::write_mask_png(dir / "g_mask.png", encode(g));
  const GridImage back = explore::image_io::read_grid_image(dir / "g.png", dir / "g_mask.png");
  CHECK(back == encode(g));
  CHECK_THROWS_AS((void)explore::image_io::read_png(dir / "missing.png"), explore::image_io::ImageIoError);
  std::filesystem::remove_all(dir);
}
