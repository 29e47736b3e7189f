#include "explore/belief.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "explore/image_io.hpp"

namespace explore::belief {

using grid::CellState;

void BeliefParams::validate() const {
  if (!(confidence > 0.5 && confidence < 1.0)) {
    throw std::invalid_argument("belief: confidence must lie in (0.5, 1)");
  }
  if (!(saturation > 0.0)) {
    throw std::invalid_argument("belief: saturation must be positive");
  }
  if (!(prior > 0.0 && prior < 1.0)) {
    throw std::invalid_argument("belief: prior must lie in (0, 1)");
  }
}

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) {
    h -= p * std::log2(p);
  }
  if (p < 1.0) {
    h -= (1.0 - p) * std::log2(1.0 - p);
  }
  return h;
}

BeliefField::BeliefField(const grid::OccupancyGrid& like, BeliefParams params)
    : width_{like.width()},
      height_{like.height()},
      resolution_{like.resolution()},
      origin_{like.origin()},
      params_{params} {
  params_.validate();
  const double initial = std::clamp(std::log(params_.prior / (1.0 - params_.prior)), -params_.saturation, params_.saturation);
  log_odds_.assign(like.size(), initial);
}

void BeliefField::accumulate(const grid::OccupancyGrid& prediction) {
  if (prediction.width() != width_ || prediction.height() != height_) {
    throw grid::DimensionMismatch("belief update: prediction dimensions differ from the belief");
  }
  const double step = params_.step();
  const double bound = params_.saturation;
  for (std::size_t i = 0; i < log_odds_.size(); ++i) {
    switch (prediction[i]) {
      case CellState::Occupied:
        log_odds_[i] = std::min(log_odds_[i] + step, bound);
        break;
      case CellState::Free:
        log_odds_[i] = std::max(log_odds_[i] - step, -bound);
        break;
      case CellState::Unknown:
        break;
    }
  }
}

void BeliefField::update(const grid::OccupancyGrid& prediction, const grid::OccupancyGrid& observed) {
  if (observed.width() != width_ || observed.height() != height_) {
    throw grid::DimensionMismatch("belief update: observation dimensions differ from the belief");
  }
  accumulate(prediction);
  for (std::size_t i = 0; i < log_odds_.size(); ++i) {
    if (observed[i] == CellState::Occupied) {
      log_odds_[i] = params_.saturation;
    } else if (observed[i] == CellState::Free) {
      log_odds_[i] = -params_.saturation;
    }
  }
}

grid::OccupancyGrid BeliefField::classify() const {
  grid::OccupancyGrid out(width_, height_, resolution_, origin_);
  for (std::size_t i = 0; i < log_odds_.size(); ++i) {
    out[i] = log_odds_[i] > 0.0 ? CellState::Occupied : (log_odds_[i] < 0.0 ? CellState::Free : CellState::Unknown);
  }
  return out;
}

BeliefField update(BeliefField belief, const grid::OccupancyGrid& prediction, const grid::OccupancyGrid& observed) {
  belief.update(prediction, observed);
  return belief;
}

double EntropyField::total() const { return std::accumulate(bits.begin(), bits.end(), 0.0); }

EntropyField entropy(const BeliefField& belief) {
  EntropyField field{belief.width(), belief.height(), belief.resolution(), belief.origin(), std::vector<double>(belief.size())};
  for (std::size_t i = 0; i < belief.size(); ++i) {
    field.bits[i] = binary_entropy(belief.probability(i));
  }
  return field;
}

double region_entropy(const EntropyField& field, const Vec2& center, double box_side) {
  const double half = box_side / 2.0 + 1e-9;
  const double res = field.resolution;
  // Cell x has its center at origin + (x + 0.5) * res.
  const int x_lo = std::max(0, static_cast<int>(std::ceil((center.x - half - field.origin.x) / res - 0.5)));
  const int x_hi = std::min(field.width - 1, static_cast<int>(std::floor((center.x + half - field.origin.x) / res - 0.5)));
  const int y_lo = std::max(0, static_cast<int>(std::ceil((center.y - half - field.origin.y) / res - 0.5)));
  const int y_hi = std::min(field.height - 1, static_cast<int>(std::floor((center.y + half - field.origin.y) / res - 0.5)));
  double sum = 0.0;
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      sum += field.bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(field.width) + static_cast<std::size_t>(x)];
    }
  }
  return sum;
}

std::vector<std::uint8_t> render_entropy(const EntropyField& field) {
  std::vector<std::uint8_t> pixels(field.bits.size());
  for (std::size_t i = 0; i < field.bits.size(); ++i) {
    pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - std::clamp(field.bits[i], 0.0, 1.0))));
  }
  return pixels;
}

void write_entropy_png(const std::filesystem::path& path, const EntropyField& field) {
  image_io::write_png(path, image_io::RasterImage{field.width, field.height, 1, render_entropy(field)});
}

}  // namespace explore::belief
