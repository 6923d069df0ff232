#include "rover/mapping/costmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rover {

void InflationConfig::validate() const {
  if (!(inscribed_radius > 0.0) || !(inflation_radius >= inscribed_radius) || !(decay_rate >= 0.0)) {
    throw std::invalid_argument("inflation config requires inflation >= inscribed > 0");
  }
}

Costmap::Costmap(GridGeometry geometry, std::vector<std::uint8_t> costs, double stamp)
    : geometry_(geometry), costs_(std::move(costs)), stamp_(stamp) {
  if (costs_.size() != geometry_.size()) {
    throw std::invalid_argument("costmap: cost array does not match geometry");
  }
}

std::uint64_t Costmap::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t byte) {
    h ^= byte;
    h *= 1099511628211ULL;
  };
  mix(static_cast<std::uint64_t>(geometry_.width));
  mix(static_cast<std::uint64_t>(geometry_.height));
  for (auto c : costs_) mix(c);
  return h;
}

std::uint8_t inflation_cost(double d, CellState state, const InflationConfig& cfg) {
  if (d == 0.0) {
    return cost::kLethal;
  }
  if (d <= cfg.inscribed_radius) {
    return cost::kInscribed;
  }
  if (d <= cfg.inflation_radius) {
    const double c = std::round(cost::kMaxInflated * std::exp(-cfg.decay_rate * (d - cfg.inscribed_radius)));
    return static_cast<std::uint8_t>(c);
  }
  return state == CellState::Unknown ? cost::kUnknown : cost::kFree;
}

namespace {

constexpr std::int64_t kFar = std::numeric_limits<std::int64_t>::max() / 4;

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), exact on integers.
void edt_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& out, std::vector<int>& v,
            std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] >= kFar) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -std::numeric_limits<double>::infinity();
      z[1] = std::numeric_limits<double>::infinity();
      continue;
    }
    auto meet = [&](int p) {
      return (static_cast<double>(f[q] + std::int64_t{q} * q) -
              static_cast<double>(f[p] + std::int64_t{p} * p)) /
             (2.0 * (q - p));
    };
    double s = meet(v[k]);
    while (s <= z[k]) {  // z[0] = -inf stops the scan
      --k;
      s = meet(v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kFar);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const std::int64_t d = q - v[j];
    out[q] = d * d + f[v[j]];
  }
}

}  // namespace

std::vector<std::int64_t> squared_distance_transform(const OccupancyGrid& grid) {
  const auto& g = grid.geometry();
  const int w = g.width;
  const int h = g.height;
  std::vector<std::int64_t> dist(g.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    dist[i] = grid.cells()[i] == CellState::Occupied ? 0 : kFar;
  }
  const int n = std::max(w, h);
  std::vector<std::int64_t> f(n), out(n);
  std::vector<int> v(n);
  std::vector<double> z(n + 1);

  // Columns first, then rows.
  f.resize(h);
  out.resize(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = dist[static_cast<std::size_t>(y) * w + x];
    edt_1d(f, out, v, z);
    for (int y = 0; y < h; ++y) dist[static_cast<std::size_t>(y) * w + x] = out[y];
  }
  f.resize(w);
  out.resize(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = dist[static_cast<std::size_t>(y) * w + x];
    edt_1d(f, out, v, z);
    for (int x = 0; x < w; ++x) dist[static_cast<std::size_t>(y) * w + x] = out[x];
  }
  for (auto& d : dist) {
    if (d >= kFar) d = -1;
  }
  return dist;
}

Costmap inflate(const OccupancyGrid& grid, const InflationConfig& cfg) {
  cfg.validate();
  const auto& g = grid.geometry();
  const auto d2 = squared_distance_transform(grid);
  std::vector<std::uint8_t> costs(g.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const double d = d2[i] < 0 ? std::numeric_limits<double>::infinity()
                               : g.resolution * std::sqrt(static_cast<double>(d2[i]));
    costs[i] = inflation_cost(d, grid.cells()[i], cfg);
  }
  return Costmap(g, std::move(costs), grid.stamp());
}

const char* to_string(Admissibility a) {
  switch (a) {
    case Admissibility::Admissible:
      return "admissible";
    case Admissibility::FootprintCollision:
      return "footprint-collision";
    case Admissibility::CenterViolation:
      return "center-violation";
  }
  return "?";
}

std::vector<Vec2> footprint_polygon(const Pose2D& pose, const Footprint& footprint) {
  const Vec2 f{std::cos(pose.theta), std::sin(pose.theta)};
  const Vec2 l{-f.y, f.x};
  const Vec2 c = pose.position();
  const double hl = footprint.length / 2.0;
  const double hw = footprint.width / 2.0;
  return {c + f * hl - l * hw, c + f * hl + l * hw, c - f * hl + l * hw, c - f * hl - l * hw};
}

namespace {

// Separating-axis test between a convex quad and an axis-aligned square;
// touching edges do not count as overlap.
bool quad_overlaps_square(const std::array<Vec2, 4>& quad, const std::array<Vec2, 2>& axes,
                          const Vec2& lo, const Vec2& hi) {
  auto project = [](const Vec2& axis, auto&& pts) {
    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn;
    for (const auto& p : pts) {
      const double s = axis.dot(p);
      mn = std::min(mn, s);
      mx = std::max(mx, s);
    }
    return std::pair{mn, mx};
  };
  const std::array<Vec2, 4> square{lo, Vec2{hi.x, lo.y}, hi, Vec2{lo.x, hi.y}};
  const std::array<Vec2, 4> all_axes{Vec2{1, 0}, Vec2{0, 1}, axes[0], axes[1]};
  for (const auto& axis : all_axes) {
    const auto [a0, a1] = project(axis, quad);
    const auto [b0, b1] = project(axis, square);
    if (a1 <= b0 || b1 <= a0) {
      return false;
    }
  }
  return true;
}

}  // namespace

Admissibility is_pose_admissible(const Costmap& costmap, const Pose2D& pose, const Footprint& footprint) {
  const auto& g = costmap.geometry();
  const auto center = g.cell_at(pose.position());
  if (!center) {
    return Admissibility::CenterViolation;
  }

  const auto poly = footprint_polygon(pose, footprint);
  const std::array<Vec2, 4> quad{poly[0], poly[1], poly[2], poly[3]};
  const std::array<Vec2, 2> axes{Vec2{std::cos(pose.theta), std::sin(pose.theta)},
                                 Vec2{-std::sin(pose.theta), std::cos(pose.theta)}};
  Vec2 lo = poly[0];
  Vec2 hi = poly[0];
  for (const auto& p : poly) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const CellIndex c0 = g.cell_of(lo);
  const CellIndex c1 = g.cell_of(hi);
  for (int y = std::max(0, c0.y); y <= std::min(g.height - 1, c1.y); ++y) {
    for (int x = std::max(0, c0.x); x <= std::min(g.width - 1, c1.x); ++x) {
      const CellIndex c{x, y};
      if (costmap.at(c) != cost::kLethal) continue;
      const Vec2 cell_lo{g.origin.x + x * g.resolution, g.origin.y + y * g.resolution};
      const Vec2 cell_hi{cell_lo.x + g.resolution, cell_lo.y + g.resolution};
      if (quad_overlaps_square(quad, axes, cell_lo, cell_hi)) {
        return Admissibility::FootprintCollision;
      }
    }
  }
  if (costmap.at(*center) >= cost::kInscribed) {
    return Admissibility::CenterViolation;
  }
  return Admissibility::Admissible;
}

Costmap mask_unknown(const Costmap& costmap, const OccupancyGrid& grid) {
  if (costmap.geometry() != grid.geometry()) {
    throw std::invalid_argument("mask_unknown: grid and costmap geometry differ");
  }
  std::vector<std::uint8_t> costs = costmap.costs();
  const auto& cells = grid.cells();
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (cells[i] == CellState::Unknown) costs[i] = cost::kUnknown;
  }
  return Costmap(costmap.geometry(), std::move(costs), costmap.stamp());
}

}  // namespace rover
