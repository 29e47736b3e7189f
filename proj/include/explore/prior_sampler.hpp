#ifndef EXPLORE_PRIOR_SAMPLER_HPP
#define EXPLORE_PRIOR_SAMPLER_HPP

#include <cstdint>
#include <vector>

#include "explore/predictor.hpp"
#include "explore/worldgen.hpp"

namespace explore::predictor {

struct PriorSamplerParams {
  /// The layout prior the completions are drawn from.
  worldgen::TownParams prior{};
  /// Observed occupied cells needed before the street is fitted instead of sampled.
  int min_fit_cells = 40;
  int min_fit_components = 2;
  /// Softmax temperature over street-hypothesis scores.
  double hypothesis_temperature = 0.05;
  double heading_jitter = 0.03;  // rad
  double offset_jitter = 1.0;    // m
  int street_tries = 50;
  int completion_tries = 30;
  int hallucination_tries = 30;
  /// Components smaller than this (bounding-box diagonal, m) take the street's orientation.
  double min_oriented_extent = 2.0;
};

/// Posterior sampler over the town prior: fits (or samples) a street, completes partially
/// observed buildings, then places unobserved buildings in fully unknown space.
class PriorSampler : public Predictor {
 public:
  struct Trace {
    worldgen::StreetCurve street;
    bool street_fitted = false;
    int components = 0;
    int completed = 0;
    int completions_degraded = 0;
    int pockets_filled = 0;
    int hallucinated = 0;
  };

  explicit PriorSampler(PriorSamplerParams params = {});

  [[nodiscard]] std::string name() const override { return "prior"; }
  [[nodiscard]] const PriorSamplerParams& params() const { return params_; }

  /// Deterministic in (observed, seed). Known cells are returned unchanged; every Unknown cell
  /// is resolved.
  [[nodiscard]] grid::OccupancyGrid sample(const grid::OccupancyGrid& observed, std::uint64_t seed, Trace* trace = nullptr) const;

 protected:
  grid::OccupancyGrid complete(const PredictionRequest& request, const grid::OccupancyGrid& observed, std::uint64_t seed) override;

 private:
  PriorSamplerParams params_;
};

/// 8-connected components of cells in the given state, each as a cell list in scan order.
[[nodiscard]] std::vector<std::vector<grid::CellIndex>> connected_components(const grid::OccupancyGrid& g, grid::CellState state);

}  // namespace explore::predictor

#endif  // EXPLORE_PRIOR_SAMPLER_HPP
