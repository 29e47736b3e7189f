#include "explore/prior_sampler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>

namespace explore::predictor {

using grid::CellIndex;
using grid::CellState;
using grid::OccupancyGrid;
using worldgen::Building;
using worldgen::StreetCurve;

std::vector<std::vector<CellIndex>> connected_components(const OccupancyGrid& g, CellState state) {
  std::vector<std::vector<CellIndex>> out;
  std::vector<std::uint8_t> seen(g.size(), 0);
  std::vector<CellIndex> stack;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      if (seen[g.index(x, y)] != 0 || g.at(x, y) != state) {
        continue;
      }
      std::vector<CellIndex> comp;
      seen[g.index(x, y)] = 1;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const CellIndex c = stack.back();
        stack.pop_back();
        comp.push_back(c);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = c.x + dx;
            const int ny = c.y + dy;
            if (g.contains(nx, ny) && seen[g.index(nx, ny)] == 0 && g.at(nx, ny) == state) {
              seen[g.index(nx, ny)] = 1;
              stack.push_back({nx, ny});
            }
          }
        }
      }
      std::sort(comp.begin(), comp.end(), [](const CellIndex& a, const CellIndex& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
      });
      out.push_back(std::move(comp));
    }
  }
  return out;
}

namespace {

/// Perpendicular distance to the street, from the frame offset corrected for slope.
double street_distance(const StreetCurve& s, const Vec2& p) {
  const Vec2 f = s.to_frame(p);
  const double v = s.a + s.b * f.x + s.c * f.x * f.x;
  const double slope = s.b + 2.0 * s.c * f.x;
  return std::abs(f.y - v) / std::sqrt(1.0 + slope * slope);
}

std::optional<std::array<double, 3>> solve3(std::array<std::array<double, 4>, 3> m) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) {
        pivot = r;
      }
    }
    if (std::abs(m[pivot][col]) < 1e-12) {
      return std::nullopt;
    }
    std::swap(m[col], m[pivot]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) {
        continue;
      }
      const double f = m[r][col] / m[col][col];
      for (int k = col; k < 4; ++k) {
        m[r][k] -= f * m[col][k];
      }
    }
  }
  return std::array<double, 3>{m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

/// Least-squares quadratic v = a + b u + c u^2 in the frame (origin, heading); c is clamped to
/// the prior curvature range and a, b refitted.
StreetCurve fit_street(const std::vector<Vec2>& pts, const Vec2& origin, double heading, const worldgen::Range& curvature) {
  StreetCurve s;
  s.origin = origin;
  s.heading = heading;
  std::array<double, 5> su{};
  std::array<double, 3> sv{};
  std::vector<Vec2> frame;
  frame.reserve(pts.size());
  for (const Vec2& p : pts) {
    const Vec2 f = s.to_frame(p);
    frame.push_back(f);
    double pw = 1.0;
    for (int k = 0; k < 5; ++k) {
      su[static_cast<std::size_t>(k)] += pw;
      if (k < 3) {
        sv[static_cast<std::size_t>(k)] += f.y * pw;
      }
      pw *= f.x;
    }
  }
  const auto sol = solve3({{{su[0], su[1], su[2], sv[0]}, {su[1], su[2], su[3], sv[1]}, {su[2], su[3], su[4], sv[2]}}});
  const double c = std::clamp(sol ? (*sol)[2] : 0.0, curvature.min / 2.0, curvature.max / 2.0);
  if (sol && c == (*sol)[2]) {
    s.a = (*sol)[0];
    s.b = (*sol)[1];
    s.c = c;
    return s;
  }
  // Refit the line to the residual with c fixed.
  double n = 0.0, u1 = 0.0, u2 = 0.0, r0 = 0.0, r1 = 0.0;
  for (const Vec2& f : frame) {
    const double r = f.y - c * f.x * f.x;
    n += 1.0;
    u1 += f.x;
    u2 += f.x * f.x;
    r0 += r;
    r1 += r * f.x;
  }
  const double det = n * u2 - u1 * u1;
  s.c = c;
  if (std::abs(det) > 1e-9) {
    s.a = (r0 * u2 - r1 * u1) / det;
    s.b = (n * r1 - u1 * r0) / det;
  } else if (n > 0.0) {
    s.a = r0 / n;
  }
  return s;
}

struct Sampler {
  const PriorSamplerParams& params;
  const OccupancyGrid& observed;
  std::mt19937_64 rng;
  OccupancyGrid out;
  PriorSampler::Trace trace;
  std::vector<Vec2> occupied_points;
  std::vector<std::uint8_t> corridor;
  std::vector<std::uint8_t> marks;

  double uniform(double lo, double hi) {
    if (!(hi > lo)) {
      return lo;
    }
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }

  int conflicts(const StreetCurve& s, double half_width) const {
    int n = 0;
    for (const Vec2& p : occupied_points) {
      n += street_distance(s, p) <= half_width ? 1 : 0;
    }
    return n;
  }

  StreetCurve choose_street(const std::vector<std::vector<CellIndex>>& components) {
    const worldgen::TownParams& prior = params.prior;
    const double half_width = prior.street_width / 2.0;
    const bool enough = static_cast<int>(occupied_points.size()) >= params.min_fit_cells &&
                        static_cast<int>(components.size()) >= params.min_fit_components;
    if (!enough) {
      StreetCurve best;
      int best_conflicts = std::numeric_limits<int>::max();
      for (int t = 0; t < params.street_tries && best_conflicts > 0; ++t) {
        const StreetCurve s = worldgen::sample_street(prior, rng);
        const int c = conflicts(s, half_width);
        if (c < best_conflicts) {
          best = s;
          best_conflicts = c;
        }
      }
      return best;
    }

    Vec2 mean{};
    for (const Vec2& p : occupied_points) {
      mean += p;
    }
    mean = mean * (1.0 / static_cast<double>(occupied_points.size()));
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const Vec2& p : occupied_points) {
      const Vec2 d = p - mean;
      sxx += d.x * d.x;
      sxy += d.x * d.y;
      syy += d.y * d.y;
    }
    const double principal = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    // Buildings flank the street, so the centerline sits either between the two rows or one
    // typical building offset to the side of a single row.
    const double offset = half_width + (prior.setback.min + prior.setback.max) / 2.0 +
                          (prior.building_dims.min + prior.building_dims.max) / 4.0;
    const double band = half_width + prior.setback.max + prior.building_dims.max;
    std::vector<StreetCurve> candidates;
    std::vector<double> scores;
    for (const double heading : {principal, principal + std::numbers::pi / 2.0}) {
      const StreetCurve base = fit_street(occupied_points, mean, heading, prior.street_curvature);
      for (const double shift : {0.0, offset, -offset}) {
        StreetCurve s = base;
        s.a += shift;
        int conflict = 0;
        int inband = 0;
        for (const Vec2& p : occupied_points) {
          const double d = street_distance(s, p);
          conflict += d <= half_width ? 1 : 0;
          inband += (d > half_width && d <= band) ? 1 : 0;
        }
        candidates.push_back(s);
        scores.push_back((inband - 4.0 * conflict) / static_cast<double>(occupied_points.size()));
      }
    }
    const double top = *std::max_element(scores.begin(), scores.end());
    std::vector<double> weights;
    for (const double sc : scores) {
      weights.push_back(std::exp((sc - top) / params.hypothesis_temperature));
    }
    StreetCurve s = candidates[std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng)];
    s.heading += uniform(-params.heading_jitter, params.heading_jitter);
    s.a += uniform(-params.offset_jitter, params.offset_jitter);
    trace.street_fitted = true;
    return s;
  }

  bool touches_unknown(const std::vector<CellIndex>& comp) const {
    static constexpr std::array<std::array<int, 2>, 4> kNeighbors{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    for (const CellIndex& c : comp) {
      for (const auto& [dx, dy] : kNeighbors) {
        if (observed.contains(c.x + dx, c.y + dy) && observed.at(c.x + dx, c.y + dy) == CellState::Unknown) {
          return true;
        }
      }
    }
    return false;
  }

  double component_heading(const std::vector<Vec2>& pts, const StreetCurve& street) const {
    double xl = pts.front().x, xh = xl, yl = pts.front().y, yh = yl;
    for (const Vec2& p : pts) {
      xl = std::min(xl, p.x);
      xh = std::max(xh, p.x);
      yl = std::min(yl, p.y);
      yh = std::max(yh, p.y);
    }
    if (std::hypot(xh - xl, yh - yl) < params.min_oriented_extent) {
      const Vec2 t = street.tangent(street.nearest_u(pts.front()));
      return std::atan2(t.y, t.x);
    }
    // Minimum-area bounding rectangle over 1 degree steps.
    const double r = observed.resolution();
    double best_area = std::numeric_limits<double>::infinity();
    double best = 0.0;
    for (int deg = 0; deg < 90; ++deg) {
      const double a = deg * std::numbers::pi / 180.0;
      const double ca = std::cos(a);
      const double sa = std::sin(a);
      double ul = std::numeric_limits<double>::infinity(), uh = -ul, vl = ul, vh = -ul;
      for (const Vec2& p : pts) {
        const double u = p.x * ca + p.y * sa;
        const double v = -p.x * sa + p.y * ca;
        ul = std::min(ul, u);
        uh = std::max(uh, u);
        vl = std::min(vl, v);
        vh = std::max(vh, v);
      }
      const double area = (uh - ul + r) * (vh - vl + r);
      if (area < best_area - 1e-9) {
        best_area = area;
        best = a;
      }
    }
    return best;
  }

  /// Cells of a sampled footprint containing the component and avoiding observed Free cells;
  /// the component's oriented bounding box when no sample fits.
  std::vector<CellIndex> complete_component(const std::vector<CellIndex>& comp, const StreetCurve& street) {
    const worldgen::TownParams& prior = params.prior;
    const double r = observed.resolution();
    std::vector<Vec2> pts;
    pts.reserve(comp.size());
    for (const CellIndex& c : comp) {
      pts.push_back(observed.cell_center(c));
    }
    const double theta = component_heading(pts, street);
    const Vec2 eu = unit_from_angle(theta);
    const Vec2 ev{-eu.y, eu.x};
    double ul = std::numeric_limits<double>::infinity(), uh = -ul, vl = ul, vh = -ul;
    for (const Vec2& p : pts) {
      ul = std::min(ul, p.dot(eu));
      uh = std::max(uh, p.dot(eu));
      vl = std::min(vl, p.dot(ev));
      vh = std::max(vh, p.dot(ev));
    }
    ul -= r / 2.0;
    uh += r / 2.0;
    vl -= r / 2.0;
    vh += r / 2.0;
    const double cur_w = uh - ul;
    const double cur_d = vh - vl;

    // Room on each side before the first observed Free cell facing that side.
    const double dmax = prior.building_dims.max;
    std::array<double, 4> room{std::max(0.0, dmax - cur_w), std::max(0.0, dmax - cur_w), std::max(0.0, dmax - cur_d),
                               std::max(0.0, dmax - cur_d)};  // -u, +u, -v, +v
    const Vec2 center_uv{(ul + uh) / 2.0, (vl + vh) / 2.0};
    const Vec2 center = eu * center_uv.x + ev * center_uv.y;
    const double reach = std::hypot(cur_w, cur_d) / 2.0 + dmax + r;
    const int x_lo = std::max(0, static_cast<int>(std::floor((center.x - reach - observed.origin().x) / r)));
    const int x_hi = std::min(observed.width() - 1, static_cast<int>(std::floor((center.x + reach - observed.origin().x) / r)));
    const int y_lo = std::max(0, static_cast<int>(std::floor((center.y - reach - observed.origin().y) / r)));
    const int y_hi = std::min(observed.height() - 1, static_cast<int>(std::floor((center.y + reach - observed.origin().y) / r)));
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        const std::size_t i = observed.index(x, y);
        if (observed[i] != CellState::Free) {
          continue;
        }
        const Vec2 p = observed.cell_center(x, y);
        const double u = p.dot(eu);
        const double v = p.dot(ev);
        if (v > vl && v < vh) {
          if (u <= ul) {
            room[0] = std::min(room[0], std::max(0.0, ul - u - 1e-6));
          } else if (u >= uh) {
            room[1] = std::min(room[1], std::max(0.0, u - uh - 1e-6));
          }
        }
        if (u > ul && u < uh) {
          if (v <= vl) {
            room[2] = std::min(room[2], std::max(0.0, vl - v - 1e-6));
          } else if (v >= vh) {
            room[3] = std::min(room[3], std::max(0.0, v - vh - 1e-6));
          }
        }
      }
    }

    auto extents = [&](double cur, double room_lo, double room_hi) {
      const double hi = cur + room_lo + room_hi;
      const double lo = std::min(std::max(prior.building_dims.min, cur), hi);
      const double extra = uniform(lo, hi) - cur;
      const double lo_ext = uniform(std::max(0.0, extra - room_hi), std::min(extra, room_lo));
      return std::pair{lo_ext, extra - lo_ext};
    };

    std::uniform_int_distribution<std::size_t> type_pick(0, prior.building_types.size() - 1);
    std::uniform_int_distribution<int> variant(0, 3);
    for (const CellIndex& c : comp) {
      marks[observed.index(c.x, c.y)] = 1;
    }
    std::vector<CellIndex> accepted;
    for (int attempt = 0; attempt < params.completion_tries && accepted.empty(); ++attempt) {
      const auto [eu_lo, eu_hi] = extents(cur_w, room[0], room[1]);
      const auto [ev_lo, ev_hi] = extents(cur_d, room[2], room[3]);
      Building b;
      b.shape.type = prior.building_types[type_pick(rng)];
      b.shape.width = cur_w + eu_lo + eu_hi;
      b.shape.depth = cur_d + ev_lo + ev_hi;
      b.shape.notch_width = uniform(0.3, 0.6);
      b.shape.notch_depth = uniform(0.3, 0.6);
      b.shape.variant = variant(rng);
      b.pose.heading = theta;
      b.pose.center = eu * (center_uv.x + (eu_hi - eu_lo) / 2.0) + ev * (center_uv.y + (ev_hi - ev_lo) / 2.0);
      std::vector<CellIndex> cells = worldgen::raster_polygon(worldgen::footprint(b), observed);
      std::size_t covered = 0;
      bool clash = false;
      for (const CellIndex& c : cells) {
        const std::size_t i = observed.index(c.x, c.y);
        covered += marks[i];
        clash = clash || observed[i] == CellState::Free;
      }
      if (!clash && covered == comp.size()) {
        accepted = std::move(cells);
      }
    }
    for (const CellIndex& c : comp) {
      marks[observed.index(c.x, c.y)] = 0;
    }
    if (!accepted.empty()) {
      return accepted;
    }
    ++trace.completions_degraded;
    Building hull;
    hull.shape.width = cur_w;
    hull.shape.depth = cur_d;
    hull.pose.heading = theta;
    hull.pose.center = center;
    std::vector<CellIndex> cells = worldgen::raster_polygon(worldgen::footprint(hull), observed);
    std::erase_if(cells, [&](const CellIndex& c) { return observed.at(c) == CellState::Free; });
    return cells;
  }

  /// Unknown regions enclosed entirely by Occupied cells (building interiors).
  void fill_pockets() {
    std::vector<std::uint8_t> seen(out.size(), 0);
    std::vector<CellIndex> region;
    std::vector<CellIndex> stack;
    static constexpr std::array<std::array<int, 2>, 4> kNeighbors{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    for (std::size_t start = 0; start < out.size(); ++start) {
      if (seen[start] != 0 || out[start] != CellState::Unknown) {
        continue;
      }
      region.clear();
      bool open = false;
      seen[start] = 1;
      stack.push_back(out.cell_of_index(start));
      while (!stack.empty()) {
        const CellIndex c = stack.back();
        stack.pop_back();
        region.push_back(c);
        for (const auto& [dx, dy] : kNeighbors) {
          const int nx = c.x + dx;
          const int ny = c.y + dy;
          if (!out.contains(nx, ny)) {
            open = true;
            continue;
          }
          const std::size_t ni = out.index(nx, ny);
          if (out[ni] == CellState::Free) {
            open = true;
          } else if (out[ni] == CellState::Unknown && seen[ni] == 0) {
            seen[ni] = 1;
            stack.push_back({nx, ny});
          }
        }
      }
      if (!open) {
        for (const CellIndex& c : region) {
          out.set(c, CellState::Occupied);
        }
        ++trace.pockets_filled;
      }
    }
  }

  void hallucinate(const StreetCurve& street, const std::vector<Vec2>& centerline, int existing) {
    const worldgen::TownParams& prior = params.prior;
    const int total = std::uniform_int_distribution<int>(prior.building_count.min, prior.building_count.max)(rng);
    const int wanted = total - existing;
    if (wanted <= 0 || centerline.size() < 2) {
      return;
    }
    worldgen::PlacementMap placement(observed, corridor, prior.building_gap);
    std::vector<CellIndex> occupied;
    std::vector<CellIndex> known_free;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i] == CellState::Occupied) {
        occupied.push_back(out.cell_of_index(i));
      } else if (observed[i] == CellState::Free) {
        known_free.push_back(out.cell_of_index(i));
      }
    }
    placement.commit(occupied);
    placement.block(known_free);

    const double u0 = street.to_frame(centerline.front()).x;
    const double u1 = street.to_frame(centerline.back()).x;
    std::uniform_real_distribution<double> u_pick(std::min(u0, u1), std::max(u0, u1));
    std::bernoulli_distribution coin(0.5);
    for (int k = 0; k < wanted; ++k) {
      for (int attempt = 0; attempt < params.hallucination_tries; ++attempt) {
        const double u = u_pick(rng);
        const int side = coin(rng) ? 1 : -1;
        const Building b = worldgen::sample_building(prior, street, u, side, rng);
        const std::vector<CellIndex> cells = placement.try_fit(b);
        if (cells.empty()) {
          continue;
        }
        placement.commit(cells);
        for (const CellIndex& c : cells) {
          out.set(c, CellState::Occupied);
        }
        ++trace.hallucinated;
        break;
      }
    }
  }
};

}  // namespace

PriorSampler::PriorSampler(PriorSamplerParams params) : params_{std::move(params)} { params_.prior.validate(); }

OccupancyGrid PriorSampler::sample(const OccupancyGrid& observed, std::uint64_t seed, Trace* trace) const {
  Sampler s{params_, observed, std::mt19937_64(seed), observed, {}, {}, {}, std::vector<std::uint8_t>(observed.size(), 0)};

  const auto components = connected_components(observed, CellState::Occupied);
  s.trace.components = static_cast<int>(components.size());
  for (const auto& comp : components) {
    for (const CellIndex& c : comp) {
      s.occupied_points.push_back(observed.cell_center(c));
    }
  }

  // Stage 1: street hypothesis.
  const StreetCurve street = s.choose_street(components);
  s.trace.street = street;
  const std::vector<Vec2> centerline = worldgen::centerline_in_map(street, observed);
  s.corridor = worldgen::corridor_mask(centerline, params_.prior.street_width / 2.0, observed);

  // Stage 2: complete partially observed buildings. Completions that overlap belong to the
  // same building for the purpose of counting.
  std::vector<int> owner(observed.size(), -1);
  std::vector<int> parent;
  auto find = [&](int i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      i = parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
    }
    return i;
  };
  for (const auto& comp : components) {
    if (!s.touches_unknown(comp)) {
      continue;
    }
    const int id = static_cast<int>(parent.size());
    parent.push_back(id);
    for (const CellIndex& c : s.complete_component(comp, street)) {
      const std::size_t i = observed.index(c.x, c.y);
      if (observed[i] == CellState::Unknown) {
        s.out[i] = CellState::Occupied;
      }
      if (owner[i] >= 0) {
        parent[static_cast<std::size_t>(find(owner[i]))] = find(id);
      }
      owner[i] = id;
    }
    ++s.trace.completed;
  }
  int existing = 0;
  for (std::size_t i = 0; i < parent.size(); ++i) {
    existing += find(static_cast<int>(i)) == static_cast<int>(i) ? 1 : 0;
  }
  // Fully observed buildings count too.
  existing += static_cast<int>(components.size()) - s.trace.completed;
  s.fill_pockets();

  // Stage 3: unobserved buildings in fully unknown space.
  s.hallucinate(street, centerline, existing);

  for (std::size_t i = 0; i < s.out.size(); ++i) {
    if (s.out[i] == CellState::Unknown) {
      s.out[i] = CellState::Free;
    }
  }
  if (trace != nullptr) {
    *trace = s.trace;
  }
  return s.out;
}

OccupancyGrid PriorSampler::complete(const PredictionRequest&, const OccupancyGrid& observed, std::uint64_t seed) {
  return sample(observed, seed);
}

}  // namespace explore::predictor
