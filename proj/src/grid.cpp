#include "explore/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace explore::grid {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Vec2 origin, CellState fill)
    : width_{width}, height_{height}, resolution_{resolution}, origin_{origin} {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("occupancy grid dimensions must be positive");
  }
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("occupancy grid resolution must be positive");
  }
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

bool OccupancyGrid::contains_point(const Vec2& p) const {
  const Vec2 e = extent();
  return p.x >= origin_.x && p.y >= origin_.y && p.x < origin_.x + e.x && p.y < origin_.y + e.y;
}

std::optional<CellIndex> OccupancyGrid::world_to_cell(const Vec2& p) const {
  const int x = static_cast<int>(std::floor((p.x - origin_.x) / resolution_));
  const int y = static_cast<int>(std::floor((p.y - origin_.y) / resolution_));
  if (!contains(x, y)) {
    return std::nullopt;
  }
  return CellIndex{x, y};
}

std::size_t OccupancyGrid::count(CellState s) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), s));
}

void require_same_shape(const OccupancyGrid& a, const OccupancyGrid& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionMismatch(
        std::string(what) + ": grid dimensions differ (" + std::to_string(a.width()) + "x" +
        std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()) + ")");
  }
}

GridImage encode(const OccupancyGrid& grid) {
  GridImage image;
  image.width = grid.width();
  image.height = grid.height();
  image.pixels.resize(grid.size());
  image.mask.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    switch (grid[i]) {
      case CellState::Occupied:
        image.pixels[i] = GridImage::kOccupied;
        image.mask[i] = 0;
        break;
      case CellState::Free:
        image.pixels[i] = GridImage::kFree;
        image.mask[i] = 0;
        break;
      case CellState::Unknown:
        image.pixels[i] = GridImage::kUnknown;
        image.mask[i] = 1;
        break;
    }
  }
  return image;
}

CellState classify_pixel(std::uint8_t pixel, DecodeThresholds thresholds) {
  if (pixel < thresholds.low) {
    return CellState::Occupied;
  }
  if (pixel > thresholds.high) {
    return CellState::Free;
  }
  return CellState::Unknown;
}

namespace {

void check_image(const GridImage& image) {
  const auto n = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
  if (image.width <= 0 || image.height <= 0 || image.pixels.size() != n) {
    throw DimensionMismatch("grid image: pixel buffer does not match its declared dimensions");
  }
  if (!image.mask.empty() && image.mask.size() != n) {
    throw DimensionMismatch("grid image: mask does not match its declared dimensions");
  }
}

}  // namespace

OccupancyGrid decode(const GridImage& image, DecodeThresholds thresholds) {
  check_image(image);
  OccupancyGrid grid(image.width, image.height);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = classify_pixel(image.pixels[i], thresholds);
  }
  return grid;
}

OccupancyGrid decode(const GridImage& image, const OccupancyGrid& like, DecodeThresholds thresholds) {
  check_image(image);
  if (image.width != like.width() || image.height != like.height()) {
    throw DimensionMismatch("decode: image dimensions do not match the target grid");
  }
  OccupancyGrid grid(like.width(), like.height(), like.resolution(), like.origin());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = classify_pixel(image.pixels[i], thresholds);
  }
  return grid;
}

double accuracy(const OccupancyGrid& predicted, const OccupancyGrid& truth, bool count_unknown_as_half) {
  require_same_shape(predicted, truth, "accuracy");
  std::size_t matches = 0;
  std::size_t unknown = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == CellState::Unknown) {
      ++unknown;
    } else if (predicted[i] == truth[i]) {
      ++matches;
    }
  }
  const auto total = static_cast<double>(truth.size());
  if (count_unknown_as_half) {
    return (static_cast<double>(matches) + 0.5 * static_cast<double>(unknown)) / total;
  }
  return static_cast<double>(matches) / total;
}

std::size_t ErrorMap::count(ErrorLabel label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

ErrorMap error_map(const OccupancyGrid& predicted, const OccupancyGrid& truth) {
  require_same_shape(predicted, truth, "error_map");
  ErrorMap out{truth.width(), truth.height(), std::vector<ErrorLabel>(truth.size())};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const CellState p = predicted[i];
    const CellState t = truth[i];
    if (p == CellState::Unknown || t == CellState::Unknown) {
      out.labels[i] = ErrorLabel::Unclassified;
    } else if (p == t) {
      out.labels[i] = p == CellState::Free ? ErrorLabel::CorrectFree : ErrorLabel::CorrectOccupied;
    } else {
      out.labels[i] = p == CellState::Free ? ErrorLabel::WrongFree : ErrorLabel::WrongOccupied;
    }
  }
  return out;
}

Rgb error_color(ErrorLabel label) {
  switch (label) {
    case ErrorLabel::CorrectFree:
      return {255, 255, 255};
    case ErrorLabel::CorrectOccupied:
      return {0, 0, 0};
    case ErrorLabel::WrongFree:
      return {0, 255, 0};
    case ErrorLabel::WrongOccupied:
      return {0, 0, 255};
    case ErrorLabel::Unclassified:
      break;
  }
  return {127, 127, 127};
}

std::vector<std::uint8_t> render_error_map(const ErrorMap& map) {
  std::vector<std::uint8_t> rgb;
  rgb.reserve(map.labels.size() * 3);
  for (const ErrorLabel label : map.labels) {
    const Rgb c = error_color(label);
    rgb.push_back(c.r);
    rgb.push_back(c.g);
    rgb.push_back(c.b);
  }
  return rgb;
}

}  // namespace explore::grid
