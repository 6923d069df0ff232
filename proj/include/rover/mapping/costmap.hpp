/**
 * @file costmap.hpp
 * @brief Inflated traversal costs and the footprint/center admissibility rule.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "rover/core/geometry.hpp"
#include "rover/mapping/occupancy_grid.hpp"

namespace rover {

namespace cost {
inline constexpr std::uint8_t kFree = 0;
inline constexpr std::uint8_t kMaxInflated = 252;
inline constexpr std::uint8_t kInscribed = 253;
inline constexpr std::uint8_t kLethal = 254;
inline constexpr std::uint8_t kUnknown = 255;
}  // namespace cost

struct InflationConfig {
  double inflation_radius{1.0};  ///< [m]
  double inscribed_radius{0.41};  ///< [m]
  double decay_rate{3.0};  ///< k [1/m]

  void validate() const;
};

class Costmap {
 public:
  Costmap() = default;
  Costmap(GridGeometry geometry, std::vector<std::uint8_t> costs, double stamp = 0.0);

  const GridGeometry& geometry() const { return geometry_; }
  std::uint8_t at(const CellIndex& c) const { return costs_[geometry_.index(c)]; }
  void set(const CellIndex& c, std::uint8_t v) { costs_[geometry_.index(c)] = v; }
  const std::vector<std::uint8_t>& costs() const { return costs_; }
  double stamp() const { return stamp_; }

  /// FNV-1a over geometry and cost bytes; used to detect map changes.
  std::uint64_t fingerprint() const;

  bool operator==(const Costmap&) const = default;

 private:
  GridGeometry geometry_{};
  std::vector<std::uint8_t> costs_;
  double stamp_{0.0};
};

/// Cost for a cell at distance `d` [m] from the nearest occupied cell center.
std::uint8_t inflation_cost(double d, CellState state, const InflationConfig& cfg);

/// Exact squared Euclidean distance (in cells^2) to the nearest Occupied
/// cell, or -1 when the grid has none.
std::vector<std::int64_t> squared_distance_transform(const OccupancyGrid& grid);

Costmap inflate(const OccupancyGrid& grid, const InflationConfig& cfg);

/// Planning view of a costmap: every cell still Unknown in `grid` is set to
/// the unknown cost, whatever inflation assigned to it.
Costmap mask_unknown(const Costmap& costmap, const OccupancyGrid& grid);

enum class Admissibility { Admissible, FootprintCollision, CenterViolation };

const char* to_string(Admissibility a);

/// Corners of the oriented footprint rectangle, counter-clockwise.
std::vector<Vec2> footprint_polygon(const Pose2D& pose, const Footprint& footprint);

/// Footprint must not overlap a lethal cell; the center cell must stay below
/// the inscribed cost. Off-map poses are center violations.
Admissibility is_pose_admissible(const Costmap& costmap, const Pose2D& pose, const Footprint& footprint);

}  // namespace rover
