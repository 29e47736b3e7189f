#ifndef EXPLORE_PLOT_HPP
#define EXPLORE_PLOT_HPP

#include <string>
#include <vector>

#include "explore/grid.hpp"
#include "explore/image_io.hpp"

namespace explore::plot {

/// A median curve with its interquartile band.
struct Band {
  std::string name;
  grid::Rgb color;
  std::vector<double> x;
  std::vector<double> mid;
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Fixed palette: 0 orange, 1 blue, 2 green, then gray.
[[nodiscard]] grid::Rgb policy_color(int index);

/// Time-series chart on a white canvas: bands shaded at quarter opacity, medians drawn on top.
/// Grid lines every 10% of the y range and every 50 x units. No text.
[[nodiscard]] image_io::RasterImage band_chart(const std::vector<Band>& bands, double x_max, double y_min, double y_max, int width = 720, int height = 420);

}  // namespace explore::plot

#endif  // EXPLORE_PLOT_HPP
