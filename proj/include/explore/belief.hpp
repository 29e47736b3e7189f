#ifndef EXPLORE_BELIEF_HPP
#define EXPLORE_BELIEF_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "explore/geometry.hpp"
#include "explore/grid.hpp"

namespace explore::belief {

struct BeliefParams {
  /// Probability that a single prediction labels a cell correctly.
  double confidence = 0.65;
  /// Bound on |log-odds|.
  double saturation = 4.0;
  double prior = 0.5;

  /// Log-odds increment of one prediction, log(q / (1 - q)).
  [[nodiscard]] double step() const { return std::log(confidence / (1.0 - confidence)); }
  void validate() const;
};

[[nodiscard]] inline double logistic(double log_odds) { return 1.0 / (1.0 + std::exp(-log_odds)); }

/// Binary entropy in bits, with 0 log 0 = 0.
[[nodiscard]] double binary_entropy(double p);

/// Per-cell occupancy posterior stored as clamped log-odds.
class BeliefField {
 public:
  BeliefField(const grid::OccupancyGrid& like, BeliefParams params = {});

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] std::size_t size() const { return log_odds_.size(); }
  [[nodiscard]] const BeliefParams& params() const { return params_; }
  [[nodiscard]] double resolution() const { return resolution_; }
  [[nodiscard]] const Vec2& origin() const { return origin_; }

  [[nodiscard]] double log_odds(std::size_t i) const { return log_odds_[i]; }
  [[nodiscard]] double probability(std::size_t i) const { return logistic(log_odds_[i]); }
  [[nodiscard]] const std::vector<double>& log_odds() const { return log_odds_; }

  /// Adds +step for predicted Occupied and -step for predicted Free, clamps to the saturation
  /// bound, then pins every cell known in `observed` to +/- saturation. Unknown predictions
  /// leave a cell unchanged.
  void update(const grid::OccupancyGrid& prediction, const grid::OccupancyGrid& observed);

  /// Same as update() without pinning.
  void accumulate(const grid::OccupancyGrid& prediction);

  /// Most likely state per cell (p > 0.5 Occupied, p < 0.5 Free, exactly 0.5 Unknown).
  [[nodiscard]] grid::OccupancyGrid classify() const;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = grid::OccupancyGrid::kDefaultResolution;
  Vec2 origin_{};
  BeliefParams params_;
  std::vector<double> log_odds_;
};

/// Functional form of BeliefField::update.
[[nodiscard]] BeliefField update(BeliefField belief, const grid::OccupancyGrid& prediction, const grid::OccupancyGrid& observed);

struct EntropyField {
  int width = 0;
  int height = 0;
  double resolution = grid::OccupancyGrid::kDefaultResolution;
  Vec2 origin{};
  std::vector<double> bits;

  [[nodiscard]] double total() const;
};

[[nodiscard]] EntropyField entropy(const BeliefField& belief);

/// Sum of entropy over cells whose centers fall in the axis-aligned square of side `box_side`
/// centered at `center`, clipped to the map.
[[nodiscard]] double region_entropy(const EntropyField& field, const Vec2& center, double box_side);

/// Grayscale rendering: pixel = round(255 * (1 - H)), dark where entropy is high.
[[nodiscard]] std::vector<std::uint8_t> render_entropy(const EntropyField& field);
void write_entropy_png(const std::filesystem::path& path, const EntropyField& field);

}  // namespace explore::belief

#endif  // EXPLORE_BELIEF_HPP
