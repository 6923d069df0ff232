// Independent reference implementations used by the unit and acceptance
// suites. None of these call into the code they check.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rover/mapping/costmap.hpp"
#include "rover/mapping/occupancy_grid.hpp"
#include "rover/world/scene.hpp"

namespace rover::oracle {

/// Ray/obstacle distance: circles by the quadratic with a scaled direction,
/// boxes by intersecting the four edges as segments.
inline std::optional<double> hit_distance(const Obstacle& ob, const Vec2& o, const Vec2& d) {
  std::optional<double> best;
  auto keep = [&](double t) {
    if (t > 1e-12 && (!best || t < *best)) best = t;
  };
  if (const auto* c = std::get_if<Circle>(&ob.shape)) {
    const Vec2 dd = d * 3.0;
    const double a = dd.dot(dd);
    const double b = 2.0 * dd.dot(o - c->center);
    const double cc = (o - c->center).dot(o - c->center) - c->radius * c->radius;
    const double disc = b * b - 4 * a * cc;
    if (disc >= 0) {
      keep(3.0 * (-b - std::sqrt(disc)) / (2 * a));
      keep(3.0 * (-b + std::sqrt(disc)) / (2 * a));
    }
    return best;
  }
  const auto& bx = std::get<Box>(ob.shape);
  const Vec2 corners[4] = {bx.min, {bx.max.x, bx.min.y}, bx.max, {bx.min.x, bx.max.y}};
  for (int k = 0; k < 4; ++k) {
    const Vec2 p = corners[k];
    const Vec2 e = corners[(k + 1) % 4] - p;
    const double den = d.cross(e);
    if (den == 0.0) continue;
    const double t = (p - o).cross(e) / den;
    const double s = (p - o).cross(d) / den;
    if (s >= 0.0 && s <= 1.0) keep(t);
  }
  return best;
}

struct SceneHit {
  double distance;
  double height;
};

/// Nearest obstacle hit within `max_range`; ties prefer the taller obstacle.
inline std::optional<SceneHit> scene_hit(const WorldScene& scene, const Vec2& o, const Vec2& d, double max_range) {
  std::optional<SceneHit> best;
  for (const auto& ob : scene.obstacles) {
    if (!(ob.height > 0.0)) continue;
    const auto t = hit_distance(ob, o, d);
    if (!t || *t > max_range) continue;
    if (!best || *t < best->distance || (*t == best->distance && ob.height > best->height)) best = SceneHit{*t, ob.height};
  }
  return best;
}

/// Cells crossed by the segment p(t) = from + t*(to - from), t in [0, 1],
/// found by dense sampling. Where two consecutive samples land in cells that
/// are not edge neighbours the interval is bisected until they are, so thin
/// corner crossings are not lost. `degenerate` counts intervals that still
/// jump diagonally after 80 bisections (the segment passes through a corner).
struct SampledCells {
  std::vector<CellIndex> cells;
  int degenerate{0};
};

inline CellIndex cell_of(const GridGeometry& g, const Vec2& p) {
  return {static_cast<int>(std::floor((p.x - g.origin.x) / g.resolution)),
          static_cast<int>(std::floor((p.y - g.origin.y) / g.resolution))};
}

inline SampledCells sample_segment(const Vec2& from, const Vec2& to, const GridGeometry& g, int samples = 1000) {
  SampledCells out;
  auto at = [&](double t) { return cell_of(g, from + (to - from) * t); };
  auto adjacent = [](const CellIndex& a, const CellIndex& b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1; };
  auto fill = [&](auto&& self, double ta, CellIndex a, double tb, CellIndex b, int depth) -> void {
    if (a == b) return;
    if (adjacent(a, b)) {
      out.cells.push_back(b);
      return;
    }
    if (depth > 80) {
      ++out.degenerate;
      out.cells.push_back(b);
      return;
    }
    const double tm = 0.5 * (ta + tb);
    const CellIndex m = at(tm);
    if (m != a && m != b) {
      self(self, ta, a, tm, m, depth + 1);
      self(self, tm, m, tb, b, depth + 1);
    } else if (m == a) {
      self(self, tm, a, tb, b, depth + 1);
    } else {
      self(self, ta, a, tm, b, depth + 1);
    }
  };
  CellIndex prev = at(0.0);
  out.cells.push_back(prev);
  for (int k = 1; k < samples; ++k) {
    const double t = static_cast<double>(k) / (samples - 1);
    const CellIndex c = at(t);
    fill(fill, static_cast<double>(k - 1) / (samples - 1), prev, t, c, 0);
    prev = c;
  }
  return out;
}

/// Expected per-ray classification for a sensor at `origin` whose ray in
/// direction `dir` stops at `hit` (or travels `max_range` on a miss).
/// Cells beyond the grid border are dropped.
struct RayClassification {
  std::vector<CellIndex> free_cells;
  std::optional<CellIndex> hit_cell;
  bool hit_occupied{false};
  int degenerate{0};
  bool ambiguous{false};  ///< hit within 1e-7 m of a cell boundary
};

inline RayClassification classify_ray(const GridGeometry& g, const Vec2& origin, const Vec2& dir,
                                      std::optional<SceneHit> hit, double max_range, double height_cut) {
  RayClassification out;
  constexpr double eps = 1e-7;
  const double reach = hit ? hit->distance + eps : max_range;
  const auto sampled = sample_segment(origin, origin + dir * reach, g);
  out.degenerate = sampled.degenerate;
  std::vector<CellIndex> cells;
  bool left_grid = false;
  for (const auto& c : sampled.cells) {
    if (!g.contains(c)) {
      left_grid = true;
      break;
    }
    cells.push_back(c);
  }
  if (hit && !left_grid) {
    out.ambiguous = cell_of(g, origin + dir * (hit->distance + eps)) != cell_of(g, origin + dir * (hit->distance + 1e-9)) ||
                    cell_of(g, origin + dir * (hit->distance - eps)) != cell_of(g, origin + dir * hit->distance);
    out.hit_cell = cells.back();
    out.hit_occupied = hit->height >= height_cut;
    cells.pop_back();
  }
  out.free_cells = std::move(cells);
  return out;
}

/// Cost of every cell from the all-pairs nearest occupied distance.
inline std::vector<std::uint8_t> brute_force_costs(const OccupancyGrid& grid, double inscribed, double radius, double k) {
  const auto& g = grid.geometry();
  std::vector<CellIndex> occupied;
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x)
      if (grid.at({x, y}) == CellState::Occupied) occupied.push_back({x, y});
  std::vector<std::uint8_t> out(g.size());
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      long best = -1;
      for (const auto& o : occupied) {
        const long d2 = static_cast<long>(o.x - x) * (o.x - x) + static_cast<long>(o.y - y) * (o.y - y);
        if (best < 0 || d2 < best) best = d2;
      }
      std::uint8_t v;
      const double d = best < 0 ? 1e300 : g.resolution * std::sqrt(static_cast<double>(best));
      if (best == 0) {
        v = 254;
      } else if (d <= inscribed) {
        v = 253;
      } else if (d <= radius) {
        v = static_cast<std::uint8_t>(std::lround(252.0 * std::exp(-k * (d - inscribed))));
      } else {
        v = grid.at({x, y}) == CellState::Unknown ? 255 : 0;
      }
      out[g.index({x, y})] = v;
    }
  }
  return out;
}

}  // namespace rover::oracle
