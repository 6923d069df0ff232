#include "rover/mapping/occupancy_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rover {

bool GridGeometry::contains(const Vec2& p) const {
  const double x = (p.x - origin.x) / resolution;
  const double y = (p.y - origin.y) / resolution;
  return x >= 0.0 && y >= 0.0 && x < width && y < height;
}

CellIndex GridGeometry::cell_of(const Vec2& p) const {
  return {static_cast<int>(std::floor((p.x - origin.x) / resolution)),
          static_cast<int>(std::floor((p.y - origin.y) / resolution))};
}

std::optional<CellIndex> GridGeometry::cell_at(const Vec2& p) const {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    return std::nullopt;
  }
  const CellIndex c = cell_of(p);
  if (!contains(c)) {
    return std::nullopt;
  }
  return c;
}

Vec2 GridGeometry::center_of(const CellIndex& c) const {
  return {origin.x + (c.x + 0.5) * resolution, origin.y + (c.y + 0.5) * resolution};
}

GridGeometry GridGeometry::covering(const Vec2& min, const Vec2& max, double resolution) {
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("grid resolution must be positive");
  }
  GridGeometry g;
  g.resolution = resolution;
  g.origin = min;
  g.width = std::max(1, static_cast<int>(std::ceil((max.x - min.x) / resolution - 1e-9)));
  g.height = std::max(1, static_cast<int>(std::ceil((max.y - min.y) / resolution - 1e-9)));
  return g;
}

OccupancyGrid::OccupancyGrid(GridGeometry geometry)
    : geometry_(geometry), cells_(geometry.size(), CellState::Unknown) {
  if (!(geometry.resolution > 0.0) || geometry.width <= 0 || geometry.height <= 0) {
    throw std::invalid_argument("occupancy grid geometry must be non-empty");
  }
}

std::vector<CellIndex> raycast_cells(const Vec2& from, const Vec2& to, const GridGeometry& grid) {
  const auto start = grid.cell_at(from);
  const auto end = grid.cell_at(to);
  if (!start || !end) {
    throw std::out_of_range("raycast_cells: endpoint outside the grid");
  }
  std::vector<CellIndex> cells;
  CellIndex c = *start;
  cells.push_back(c);
  if (c == *end) {
    return cells;
  }

  // Amanatides-Woo traversal in cell units.
  const double fx = (from.x - grid.origin.x) / grid.resolution;
  const double fy = (from.y - grid.origin.y) / grid.resolution;
  const double dx = (to.x - grid.origin.x) / grid.resolution - fx;
  const double dy = (to.y - grid.origin.y) / grid.resolution - fy;
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  constexpr double inf = std::numeric_limits<double>::infinity();
  double t_max_x = step_x == 0 ? inf : ((step_x > 0 ? c.x + 1 - fx : fx - c.x) / std::abs(dx));
  double t_max_y = step_y == 0 ? inf : ((step_y > 0 ? c.y + 1 - fy : fy - c.y) / std::abs(dy));
  const double t_delta_x = step_x == 0 ? inf : 1.0 / std::abs(dx);
  const double t_delta_y = step_y == 0 ? inf : 1.0 / std::abs(dy);

  while (c != *end) {
    // Never step past the end cell along an axis that has already arrived.
    const bool x_done = c.x == end->x;
    const bool y_done = c.y == end->y;
    if (y_done || (!x_done && t_max_x < t_max_y)) {
      c.x += step_x;
      t_max_x += t_delta_x;
    } else if (x_done || t_max_y < t_max_x) {
      c.y += step_y;
      t_max_y += t_delta_y;
    } else {
      c.x += step_x;
      c.y += step_y;
      t_max_x += t_delta_x;
      t_max_y += t_delta_y;
    }
    cells.push_back(c);
  }
  return cells;
}

namespace {

// Largest ray parameter that keeps origin + t*dir inside the grid box.
double exit_distance(const GridGeometry& grid, const Vec2& origin, const Vec2& dir) {
  const double lo[2] = {grid.origin.x, grid.origin.y};
  const double hi[2] = {grid.origin.x + grid.width * grid.resolution,
                        grid.origin.y + grid.height * grid.resolution};
  const double o[2] = {origin.x, origin.y};
  const double d[2] = {dir.x, dir.y};
  double t = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 2; ++a) {
    if (d[a] > 0.0) t = std::min(t, (hi[a] - o[a]) / d[a]);
    if (d[a] < 0.0) t = std::min(t, (lo[a] - o[a]) / d[a]);
  }
  return t;
}

}  // namespace

RayTrace trace_ray(const GridGeometry& grid, const Pose2D& origin, const DepthRay& ray,
                   double max_range, double height_cut) {
  const double angle = origin.theta + ray.azimuth;
  const Vec2 dir{std::cos(angle), std::sin(angle)};
  const Vec2 from = origin.position();
  // Keep the endpoint strictly inside the grid; cells past the border are ignored.
  const double limit = exit_distance(grid, from, dir) - 1e-9;
  const bool hit = ray.range.has_value();
  // Hits are nudged into the obstacle so a face on a grid line lands in the obstacle's cell.
  double reach = hit ? *ray.range + 1e-9 : max_range;
  const bool hit_on_grid = hit && reach <= limit;
  reach = std::min(reach, limit);

  RayTrace out;
  auto cells = raycast_cells(from, from + dir * reach, grid);
  if (hit_on_grid) {
    out.hit_cell = cells.back();
    out.hit_state = ray.hit_height >= height_cut ? CellState::Occupied : CellState::Free;
    cells.pop_back();
  }
  out.free_cells = std::move(cells);
  return out;
}

void integrate_scan(OccupancyGrid& grid, const DepthScan& scan, double height_cut) {
  const auto& geom = grid.geometry();
  if (!geom.contains(scan.origin.position())) {
    throw std::out_of_range("integrate_scan: scan origin outside the grid");
  }
  // Occupied hits are applied after all clearing so a grazing ray in the same
  // scan cannot erase an obstacle face seen by its neighbour.
  std::vector<CellIndex> hits;
  for (const auto& ray : scan.rays) {
    const RayTrace trace = trace_ray(geom, scan.origin, ray, scan.max_range, height_cut);
    for (const auto& c : trace.free_cells) {
      grid.set(c, CellState::Free);
    }
    if (trace.hit_cell) {
      if (trace.hit_state == CellState::Occupied) {
        hits.push_back(*trace.hit_cell);
      } else {
        grid.set(*trace.hit_cell, CellState::Free);
      }
    }
  }
  for (const auto& c : hits) {
    grid.set(c, CellState::Occupied);
  }
  grid.set_stamp(scan.timestamp);
}

OccupancyGrid rasterize_scene(const WorldScene& scene, const GridGeometry& geometry, double height_cut) {
  OccupancyGrid grid(geometry);
  for (std::size_t i = 0; i < geometry.size(); ++i) {
    grid.set({static_cast<int>(i % static_cast<std::size_t>(geometry.width)),
              static_cast<int>(i / static_cast<std::size_t>(geometry.width))},
             CellState::Free);
  }
  const double r = geometry.resolution;
  for (const auto& ob : scene.obstacles) {
    if (ob.height < height_cut) continue;
    Vec2 lo, hi;
    if (const auto* c = std::get_if<Circle>(&ob.shape)) {
      lo = {c->center.x - c->radius, c->center.y - c->radius};
      hi = {c->center.x + c->radius, c->center.y + c->radius};
    } else {
      lo = std::get<Box>(ob.shape).min;
      hi = std::get<Box>(ob.shape).max;
    }
    const CellIndex a = geometry.cell_of(lo);
    const CellIndex b = geometry.cell_of(hi);
    for (int y = std::max(a.y - 1, 0); y <= std::min(b.y + 1, geometry.height - 1); ++y) {
      for (int x = std::max(a.x - 1, 0); x <= std::min(b.x + 1, geometry.width - 1); ++x) {
        const Vec2 cl{geometry.origin.x + x * r, geometry.origin.y + y * r};
        if (overlaps_rect(ob, cl, {cl.x + r, cl.y + r})) grid.set({x, y}, CellState::Occupied);
      }
    }
  }
  return grid;
}

}  // namespace rover
