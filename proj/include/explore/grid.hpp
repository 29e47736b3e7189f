#ifndef EXPLORE_GRID_HPP
#define EXPLORE_GRID_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "explore/geometry.hpp"

namespace explore::grid {

enum class CellState : std::uint8_t { Free, Occupied, Unknown };

/// Raised whenever two grids (or a grid and an image) are combined with different shapes.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Integer cell coordinates; x is the column, y the row (row 0 at the map's minimum y).
struct CellIndex {
  int x = 0;
  int y = 0;
  constexpr bool operator==(const CellIndex&) const = default;
};

/// Dense row-major tri-state occupancy grid.
class OccupancyGrid {
 public:
  static constexpr int kDefaultSize = 200;
  static constexpr double kDefaultResolution = 0.5;

  OccupancyGrid() = default;

  OccupancyGrid(
      int width,
      int height,
      double resolution = kDefaultResolution,
      Vec2 origin = {},
      CellState fill = CellState::Unknown);

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] std::size_t size() const { return cells_.size(); }
  [[nodiscard]] double resolution() const { return resolution_; }
  [[nodiscard]] const Vec2& origin() const { return origin_; }

  /// World extent in meters along x and y.
  [[nodiscard]] Vec2 extent() const { return {width_ * resolution_, height_ * resolution_}; }

  [[nodiscard]] bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  [[nodiscard]] bool contains(CellIndex c) const { return contains(c.x, c.y); }
  [[nodiscard]] bool contains_point(const Vec2& p) const;

  [[nodiscard]] std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  [[nodiscard]] CellIndex cell_of_index(std::size_t i) const {
    return {static_cast<int>(i % static_cast<std::size_t>(width_)), static_cast<int>(i / static_cast<std::size_t>(width_))};
  }

  [[nodiscard]] CellState at(int x, int y) const { return cells_[index(x, y)]; }
  [[nodiscard]] CellState at(CellIndex c) const { return at(c.x, c.y); }
  void set(int x, int y, CellState s) { cells_[index(x, y)] = s; }
  void set(CellIndex c, CellState s) { set(c.x, c.y, s); }

  [[nodiscard]] CellState operator[](std::size_t i) const { return cells_[i]; }
  CellState& operator[](std::size_t i) { return cells_[i]; }

  [[nodiscard]] std::span<const CellState> cells() const { return cells_; }
  [[nodiscard]] std::span<CellState> cells() { return cells_; }

  /// Cell containing a world point, or nullopt outside the map.
  [[nodiscard]] std::optional<CellIndex> world_to_cell(const Vec2& p) const;
  [[nodiscard]] Vec2 cell_center(int x, int y) const {
    return {origin_.x + (x + 0.5) * resolution_, origin_.y + (y + 0.5) * resolution_};
  }
  [[nodiscard]] Vec2 cell_center(CellIndex c) const { return cell_center(c.x, c.y); }

  [[nodiscard]] std::size_t count(CellState s) const;
  [[nodiscard]] bool same_shape(const OccupancyGrid& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool operator==(const OccupancyGrid& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = kDefaultResolution;
  Vec2 origin_{};
  std::vector<CellState> cells_;
};

/// Throws DimensionMismatch unless both grids have the same width and height.
void require_same_shape(const OccupancyGrid& a, const OccupancyGrid& b, const char* what);

/// Grayscale encoding of a tri-state grid plus its inpainting mask.
struct GridImage {
  static constexpr std::uint8_t kOccupied = 0;
  static constexpr std::uint8_t kUnknown = 127;
  static constexpr std::uint8_t kFree = 255;

  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, same layout as the grid
  std::vector<std::uint8_t> mask;    // 1 = unknown / to be inpainted

  bool operator==(const GridImage&) const = default;
};

struct DecodeThresholds {
  std::uint8_t low = 127;   // pixel < low  -> Occupied
  std::uint8_t high = 127;  // pixel > high -> Free
};

[[nodiscard]] GridImage encode(const OccupancyGrid& grid);

/// Classifies every pixel by the thresholds. The output takes its shape from the image; the
/// overload with a template grid also copies resolution/origin and checks the dimensions.
[[nodiscard]] OccupancyGrid decode(const GridImage& image, DecodeThresholds thresholds = {});
[[nodiscard]] OccupancyGrid decode(const GridImage& image, const OccupancyGrid& like, DecodeThresholds thresholds = {});

[[nodiscard]] CellState classify_pixel(std::uint8_t pixel, DecodeThresholds thresholds = {});

/// Fraction of cells where `predicted` matches `truth`. Unknown predictions count as a
/// mismatch, or as half a match when `count_unknown_as_half` is set.
[[nodiscard]] double accuracy(const OccupancyGrid& predicted, const OccupancyGrid& truth, bool count_unknown_as_half);

enum class ErrorLabel : std::uint8_t { CorrectFree, CorrectOccupied, WrongFree, WrongOccupied, Unclassified };

struct ErrorMap {
  int width = 0;
  int height = 0;
  std::vector<ErrorLabel> labels;

  [[nodiscard]] std::size_t count(ErrorLabel label) const;
};

/// WrongFree: predicted Free where the truth is Occupied. WrongOccupied: the reverse.
/// Cells left Unknown in either map are Unclassified.
[[nodiscard]] ErrorMap error_map(const OccupancyGrid& predicted, const OccupancyGrid& truth);

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

/// White / black / green / blue for the four labels; gray for Unclassified.
[[nodiscard]] Rgb error_color(ErrorLabel label);

/// Interleaved RGB bytes, row-major.
[[nodiscard]] std::vector<std::uint8_t> render_error_map(const ErrorMap& map);

}  // namespace explore::grid

#endif  // EXPLORE_GRID_HPP
