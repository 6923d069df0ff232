/**
 * @file global_planner.hpp
 * @brief Dijkstra minimum-cost search over the 8-connected costmap lattice.
 *
 * Edge weight between neighbouring cells is step * (1 + mean_cost / 64) with
 * step 1 (orthogonal) or sqrt(2) (diagonal). Path costs are accumulated
 * exactly as (a + sqrt(2) * b) / 128 with integer a, b, so optimality and
 * tie-breaking never depend on floating-point summation order.
 */
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "rover/core/geometry.hpp"
#include "rover/mapping/costmap.hpp"

namespace rover {

/// Path cost of the form (orthogonal + sqrt(2) * diagonal) / 128.
struct ExactCost {
  std::int64_t orthogonal{0};
  std::int64_t diagonal{0};

  double value() const;
  bool operator==(const ExactCost&) const = default;
  friend bool operator<(const ExactCost& a, const ExactCost& b);
  ExactCost operator+(const ExactCost& o) const { return {orthogonal + o.orthogonal, diagonal + o.diagonal}; }
};

/// Weight of the step between two adjacent cells.
ExactCost edge_cost(std::uint8_t from_cost, std::uint8_t to_cost, bool diagonal);

/// True for cells the rover center may never occupy (>= 253, incl. unknown).
inline bool is_blocked(std::uint8_t c) { return c >= cost::kInscribed; }

struct GridPath {
  std::vector<CellIndex> cells;
  std::vector<Pose2D> world_poses;
  double total_cost{0.0};
  ExactCost exact_cost{};
  Pose2D goal{};
};

enum class NoPathReason { StartOffMap, GoalOffMap, BlockedStart, BlockedGoal, Disconnected };

const char* to_string(NoPathReason r);

struct NoPath {
  NoPathReason reason;
};

using PathPtr = std::shared_ptr<const GridPath>;
using PlanResult = std::variant<PathPtr, NoPath>;

PlanResult plan(const Costmap& costmap, const Pose2D& start, const Pose2D& goal);

/// Called on every map update. Returns `previous` (the same object) while the
/// goal is unchanged and none of its cells became blocked; otherwise plans
/// again from `current`.
struct ReplanOutcome {
  PlanResult result;
  bool replanned{false};
};

ReplanOutcome replan_on_update(const Costmap& costmap, const Pose2D& current, const Pose2D& goal,
                               const PathPtr& previous);

}  // namespace rover
