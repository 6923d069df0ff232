/**
 * @file occupancy_grid.hpp
 * @brief Fixed-size occupancy lattice fed by depth scans.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rover/core/geometry.hpp"
#include "rover/world/depth_sensor.hpp"

namespace rover {

struct CellIndex {
  int x{0};
  int y{0};

  constexpr bool operator==(const CellIndex&) const = default;
  constexpr auto operator<=>(const CellIndex&) const = default;
};

/// Lattice placement shared by occupancy grids and costmaps. `origin` is the
/// world position of the lower-left corner of cell (0, 0).
struct GridGeometry {
  double resolution{0.1};
  Vec2 origin{};
  int width{0};
  int height{0};

  bool contains(const CellIndex& c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  bool contains(const Vec2& p) const;
  CellIndex cell_of(const Vec2& p) const;
  std::optional<CellIndex> cell_at(const Vec2& p) const;
  Vec2 center_of(const CellIndex& c) const;
  std::size_t index(const CellIndex& c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.x);
  }
  std::size_t size() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool operator==(const GridGeometry&) const = default;

  /// Grid covering [min, max] at `resolution`.
  static GridGeometry covering(const Vec2& min, const Vec2& max, double resolution);
};

enum class CellState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  explicit OccupancyGrid(GridGeometry geometry);

  const GridGeometry& geometry() const { return geometry_; }
  CellState at(const CellIndex& c) const { return cells_[geometry_.index(c)]; }
  void set(const CellIndex& c, CellState s) { cells_[geometry_.index(c)] = s; }
  const std::vector<CellState>& cells() const { return cells_; }

  double stamp() const { return stamp_; }
  void set_stamp(double t) { stamp_ = t; }

  bool operator==(const OccupancyGrid&) const = default;

 private:
  GridGeometry geometry_{};
  std::vector<CellState> cells_;
  double stamp_{0.0};
};

/// Every cell the segment crosses with positive length, start cell first and
/// end cell last. A segment passing exactly through a lattice corner steps
/// diagonally. Throws std::out_of_range if an endpoint is off the grid.
std::vector<CellIndex> raycast_cells(const Vec2& from, const Vec2& to, const GridGeometry& grid);

inline constexpr double kDefaultHeightCut = 0.20;

/// Inverse measurement model: cells before the hit become Free, the hit cell
/// becomes Occupied when the obstacle is at least `height_cut` tall, cells
/// beyond the hit are left untouched. Misses clear the whole ray. Within one
/// scan occupied hits win over clearing; across scans the latest write wins.
void integrate_scan(OccupancyGrid& grid, const DepthScan& scan, double height_cut = kDefaultHeightCut);

/// Ground truth lattice: a cell is Occupied when an obstacle at least
/// `height_cut` tall overlaps it, Free otherwise.
OccupancyGrid rasterize_scene(const WorldScene& scene, const GridGeometry& geometry,
                              double height_cut = kDefaultHeightCut);

/// Per-ray classification used by integrate_scan, exposed for inspection.
struct RayTrace {
  std::vector<CellIndex> free_cells;
  std::optional<CellIndex> hit_cell;
  CellState hit_state{CellState::Free};
};

RayTrace trace_ray(const GridGeometry& grid, const Pose2D& origin, const DepthRay& ray,
                   double max_range, double height_cut = kDefaultHeightCut);

}  // namespace rover
