#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "explore/belief.hpp"
#include "explore/image_io.hpp"

using namespace explore;
using namespace explore::belief;
using grid::CellState;
using grid::OccupancyGrid;

namespace {

// Eq. 1 written out directly, no shared helpers.
double entropy_bits(double p) {
  if (p <= 0.0 || p >= 1.0) {
    return 0.0;
  }
  return -p * std::log(p) / std::log(2.0) - (1.0 - p) * std::log(1.0 - p) / std::log(2.0);
}

OccupancyGrid filled(int w, int h, CellState s) { return OccupancyGrid(w, h, 0.5, {}, s); }

}  // namespace

TEST_CASE("binary entropy reference values") {
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(std::abs(binary_entropy(0.25) - 0.8112781) < 1e-6);
  CHECK(std::abs(binary_entropy(0.25) - entropy_bits(0.25)) < 1e-12);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = u(rng);
    CHECK(std::abs(binary_entropy(p) - binary_entropy(1.0 - p)) < 1e-12);
    CHECK(std::abs(binary_entropy(p) - entropy_bits(p)) < 1e-12);
  }
}

TEST_CASE("initial belief is maximally uncertain") {
  const BeliefField b(filled(5, 4, CellState::Unknown));
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(b.probability(i) == 0.5);
  }
  CHECK(entropy(b).total() == doctest::Approx(20.0));
}

TEST_CASE("repeated occupied predictions saturate in closed form") {
  const OccupancyGrid unknown = filled(3, 3, CellState::Unknown);
  const OccupancyGrid occ = filled(3, 3, CellState::Occupied);
  BeliefField b(unknown);
  const double ell = std::log(0.65 / 0.35);
  CHECK(b.params().step() == doctest::Approx(ell).epsilon(1e-14));
  for (int k = 1; k <= 10; ++k) {
    b.update(occ, unknown);
    const double expected = std::min(k * ell, 4.0);
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(std::abs(b.log_odds(i) - expected) < 1e-12);
      CHECK(std::abs(b.probability(i) - 1.0 / (1.0 + std::exp(-expected))) < 1e-9);
    }
  }
}

TEST_CASE("alternating predictions cancel") {
  const OccupancyGrid unknown = filled(4, 4, CellState::Unknown);
  BeliefField b(unknown);
  for (int k = 0; k < 6; ++k) {
    b.update(filled(4, 4, k % 2 == 0 ? CellState::Occupied : CellState::Free), unknown);
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(std::abs(b.probability(i) - 0.5) < 1e-9);
  }
}

TEST_CASE("observed cells are pinned at the saturation bound") {
  OccupancyGrid observed = filled(3, 1, CellState::Unknown);
  observed.set(0, 0, CellState::Free);
  observed.set(1, 0, CellState::Occupied);
  BeliefField b(observed);
  for (int k = 0; k < 7; ++k) {
    b.update(filled(3, 1, CellState::Occupied), observed);
  }
  b.update(filled(3, 1, CellState::Free), observed);
  CHECK(b.log_odds(0) == -4.0);
  CHECK(b.log_odds(1) == 4.0);
  CHECK(b.probability(0) == doctest::Approx(1.0 / (1.0 + std::exp(4.0))));
  CHECK(b.log_odds(2) == doctest::Approx(4.0 - std::log(0.65 / 0.35)));
}

TEST_CASE("unknown prediction cells leave the belief untouched") {
  const OccupancyGrid unknown = filled(2, 2, CellState::Unknown);
  BeliefField b(unknown);
  b.update(filled(2, 2, CellState::Occupied), unknown);
  const auto before = b.log_odds();
  b.update(unknown, unknown);
  CHECK(b.log_odds() == before);
}

TEST_CASE("updates commute without pinning") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(0, 2);
  const OccupancyGrid unknown = filled(8, 8, CellState::Unknown);
  std::vector<OccupancyGrid> preds;
  for (int k = 0; k < 5; ++k) {
    OccupancyGrid p = unknown;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = static_cast<CellState>(pick(rng));
    }
    preds.push_back(p);
  }
  // Within the saturation bound the order of log-odds additions does not matter.
  BeliefParams wide;
  wide.saturation = 100.0;
  BeliefField a(unknown, wide);
  BeliefField b(unknown, wide);
  for (const auto& p : preds) {
    a.accumulate(p);
  }
  for (auto it = preds.rbegin(); it != preds.rend(); ++it) {
    b.accumulate(*it);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.log_odds(i) == doctest::Approx(b.log_odds(i)).epsilon(1e-12));
  }
}

TEST_CASE("saturation bound holds under random streams") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(0, 2);
  OccupancyGrid observed = filled(10, 10, CellState::Unknown);
  BeliefField b(observed);
  const double floor_h = binary_entropy(logistic(4.0));
  for (int k = 0; k < 200; ++k) {
    OccupancyGrid p = observed;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = static_cast<CellState>(pick(rng));
    }
    if (k % 20 == 0) {
      observed[static_cast<std::size_t>(k / 2)] = CellState::Free;
    }
    b.update(p, observed);
    const EntropyField h = entropy(b);
    for (std::size_t i = 0; i < b.size(); ++i) {
      REQUIRE(std::abs(b.log_odds(i)) <= 4.0);
      REQUIRE(h.bits[i] >= floor_h - 1e-12);
    }
  }
}

TEST_CASE("dimension mismatch is rejected") {
  BeliefField b(filled(4, 4, CellState::Unknown));
  CHECK_THROWS_AS(b.update(filled(4, 5, CellState::Free), filled(4, 4, CellState::Unknown)), grid::DimensionMismatch);
  CHECK_THROWS_AS(b.update(filled(4, 4, CellState::Free), filled(3, 4, CellState::Unknown)), grid::DimensionMismatch);
}

TEST_CASE("truth-consistent entropy never increases under a perfect predictor") {
  std::mt19937_64 rng(8);
  std::bernoulli_distribution occ(0.2);
  OccupancyGrid truth = filled(12, 12, CellState::Free);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    truth[i] = occ(rng) ? CellState::Occupied : CellState::Free;
  }
  const OccupancyGrid unknown = filled(12, 12, CellState::Unknown);
  BeliefField b(unknown);
  EntropyField prev = entropy(b);
  for (int k = 0; k < 12; ++k) {
    b.update(truth, unknown);
    const EntropyField next = entropy(b);
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(next.bits[i] <= prev.bits[i] + 1e-15);
    }
    prev = next;
  }
}

TEST_CASE("region entropy counts the discretized box") {
  const BeliefField b(filled(200, 200, CellState::Unknown));
  const EntropyField h = entropy(b);

  // Box centered on a cell center: 21 x 21 cells with centers inside the closed box.
  CHECK(region_entropy(h, {50.25, 50.25}, 10.0) == doctest::Approx(21.0 * 21.0));
  // Centered on a cell corner: 20 x 20.
  CHECK(region_entropy(h, {50.0, 50.0}, 10.0) == doctest::Approx(20.0 * 20.0));
  // Clipped at the map corner: centers 0.25 .. 5.0 -> 10 per axis.
  CHECK(region_entropy(h, {0.0, 0.0}, 10.0) == doctest::Approx(10.0 * 10.0));
  CHECK(region_entropy(h, {-20.0, 50.0}, 10.0) == 0.0);
  CHECK(region_entropy(h, {150.0, 150.0}, 10.0) == 0.0);

  // Brute force on an off-grid center.
  const Vec2 c{33.37, 71.9};
  int count = 0;
  for (int y = 0; y < 200; ++y) {
    for (int x = 0; x < 200; ++x) {
      const double cx = (x + 0.5) * 0.5;
      const double cy = (y + 0.5) * 0.5;
      if (std::abs(cx - c.x) <= 5.0 && std::abs(cy - c.y) <= 5.0) {
        ++count;
      }
    }
  }
  CHECK(region_entropy(h, c, 10.0) == doctest::Approx(static_cast<double>(count)));
}

TEST_CASE("saturated field has near-zero region entropy") {
  const OccupancyGrid observed = filled(40, 40, CellState::Free);
  BeliefField b(observed);
  b.update(observed, observed);
  const double cells = 21.0 * 21.0;
  CHECK(region_entropy(entropy(b), {10.25, 10.25}, 10.0) <= cells * binary_entropy(logistic(4.0)) + 1e-9);
}

TEST_CASE("entropy rendering") {
  EntropyField f{3, 1, 0.5, {}, {1.0, 0.0, 0.5}};
  CHECK(render_entropy(f) == std::vector<std::uint8_t>{0, 255, 128});

  const auto path = std::filesystem::temp_directory_path() / "explore_entropy_test.png";
  write_entropy_png(path, f);
  const auto img = image_io::read_png(path);
  CHECK(img.width == 3);
  CHECK(img.data == std::vector<std::uint8_t>{0, 255, 128});
  std::filesystem::remove(path);
}
