#include "explore/plot.hpp"

#include <algorithm>
#include <cmath>

namespace explore::plot {

grid::Rgb policy_color(int index) {
  switch (index) {
    case 0:
      return {230, 120, 20};
    case 1:
      return {40, 90, 200};
    case 2:
      return {30, 150, 60};
    default:
      return {110, 110, 110};
  }
}

namespace {

struct Canvas {
  int w;
  int h;
  std::vector<std::uint8_t> px;

  void blend(int x, int y, grid::Rgb c, double alpha) {
    if (x < 0 || y < 0 || x >= w || y >= h) {
      return;
    }
    auto* p = &px[(static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)) * 3];
    const std::uint8_t rgb[3] = {c.r, c.g, c.b};
    for (int k = 0; k < 3; ++k) {
      p[k] = static_cast<std::uint8_t>(std::lround((1.0 - alpha) * p[k] + alpha * rgb[k]));
    }
  }
};

}  // namespace

image_io::RasterImage band_chart(const std::vector<Band>& bands, double x_max, double y_min, double y_max, int width, int height) {
  constexpr int kMargin = 30;
  Canvas c{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3, 255)};
  const int pw = width - 2 * kMargin;
  const int ph = height - 2 * kMargin;
  const auto to_px = [&](double x) { return kMargin + static_cast<int>(std::lround(x / x_max * pw)); };
  // Image row 0 is the top, so y grows downward.
  const auto to_py = [&](double y) {
    const double f = std::clamp((y - y_min) / (y_max - y_min), 0.0, 1.0);
    return kMargin + ph - static_cast<int>(std::lround(f * ph));
  };

  const grid::Rgb light{225, 225, 225};
  for (int k = 0; k <= 10; ++k) {
    const int y = kMargin + ph * k / 10;
    for (int x = kMargin; x <= kMargin + pw; ++x) {
      c.blend(x, y, light, 1.0);
    }
  }
  for (double t = 0.0; t <= x_max + 1e-9; t += 50.0) {
    const int x = to_px(t);
    for (int y = kMargin; y <= kMargin + ph; ++y) {
      c.blend(x, y, light, 1.0);
    }
  }

  for (const Band& b : bands) {
    for (std::size_t i = 0; i + 1 < b.x.size(); ++i) {
      const int x0 = to_px(b.x[i]);
      const int x1 = to_px(b.x[i + 1]);
      for (int x = x0; x < x1; ++x) {
        const double f = x1 == x0 ? 0.0 : static_cast<double>(x - x0) / (x1 - x0);
        const int top = to_py(b.hi[i] + f * (b.hi[i + 1] - b.hi[i]));
        const int bottom = to_py(b.lo[i] + f * (b.lo[i + 1] - b.lo[i]));
        for (int y = top; y <= bottom; ++y) {
          c.blend(x, y, b.color, 0.25);
        }
      }
    }
  }
  for (const Band& b : bands) {
    for (std::size_t i = 0; i + 1 < b.x.size(); ++i) {
      const int x0 = to_px(b.x[i]);
      const int x1 = to_px(b.x[i + 1]);
      const int y0 = to_py(b.mid[i]);
      const int y1 = to_py(b.mid[i + 1]);
      const int steps = std::max({std::abs(x1 - x0), std::abs(y1 - y0), 1});
      for (int s = 0; s <= steps; ++s) {
        const int x = x0 + (x1 - x0) * s / steps;
        const int y = y0 + (y1 - y0) * s / steps;
        c.blend(x, y, b.color, 1.0);
        c.blend(x, y + 1, b.color, 1.0);
      }
    }
  }

  const grid::Rgb axis{60, 60, 60};
  for (int x = kMargin; x <= kMargin + pw; ++x) {
    c.blend(x, kMargin + ph, axis, 1.0);
    c.blend(x, kMargin, axis, 1.0);
  }
  for (int y = kMargin; y <= kMargin + ph; ++y) {
    c.blend(kMargin, y, axis, 1.0);
    c.blend(kMargin + pw, y, axis, 1.0);
  }
  return {width, height, 3, std::move(c.px)};
}

}  // namespace explore::plot
