#include "rover/planning/global_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

namespace rover {

double ExactCost::value() const {
  return (static_cast<double>(orthogonal) + std::numbers::sqrt2 * static_cast<double>(diagonal)) / 128.0;
}

bool operator<(const ExactCost& a, const ExactCost& b) {
  // a < b  <=>  (a.o - b.o) < sqrt(2) * (b.d - a.d)
  const __int128 lhs = static_cast<__int128>(a.orthogonal) - b.orthogonal;
  const __int128 rhs = static_cast<__int128>(b.diagonal) - a.diagonal;
  if (lhs >= 0 && rhs <= 0) return false;
  if (lhs < 0 && rhs >= 0) return true;
  if (lhs < 0) {
    // both negative: |lhs| > sqrt(2)|rhs|
    return lhs * lhs > 2 * rhs * rhs;
  }
  return lhs * lhs < 2 * rhs * rhs;
}

ExactCost edge_cost(std::uint8_t from_cost, std::uint8_t to_cost, bool diagonal) {
  const std::int64_t w = 128 + std::int64_t{from_cost} + std::int64_t{to_cost};
  return diagonal ? ExactCost{0, w} : ExactCost{w, 0};
}

const char* to_string(NoPathReason r) {
  switch (r) {
    case NoPathReason::StartOffMap:
      return "start-off-map";
    case NoPathReason::GoalOffMap:
      return "goal-off-map";
    case NoPathReason::BlockedStart:
      return "blocked-start";
    case NoPathReason::BlockedGoal:
      return "blocked-goal";
    case NoPathReason::Disconnected:
      return "disconnected";
  }
  return "?";
}

namespace {

struct QueueEntry {
  ExactCost cost;
  std::size_t index;
};

struct Later {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (b.cost < a.cost) return true;
    if (a.cost < b.cost) return false;
    return a.index > b.index;
  }
};

void assign_headings(GridPath& path, const GridGeometry& g, const Pose2D& goal) {
  const std::size_t n = path.cells.size();
  path.world_poses.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 c = g.center_of(path.cells[i]);
    double heading = goal.theta;
    if (i + 1 < n) {
      const Vec2 next = g.center_of(path.cells[i + 1]);
      heading = std::atan2(next.y - c.y, next.x - c.x);
    }
    path.world_poses[i] = {c.x, c.y, heading};
  }
}

}  // namespace

PlanResult plan(const Costmap& costmap, const Pose2D& start, const Pose2D& goal) {
  const auto& g = costmap.geometry();
  const auto s = g.cell_at(start.position());
  if (!s) return NoPath{NoPathReason::StartOffMap};
  const auto t = g.cell_at(goal.position());
  if (!t) return NoPath{NoPathReason::GoalOffMap};
  if (is_blocked(costmap.at(*s))) return NoPath{NoPathReason::BlockedStart};
  if (is_blocked(costmap.at(*t))) return NoPath{NoPathReason::BlockedGoal};

  const std::size_t n = g.size();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<ExactCost> best(n);
  std::vector<bool> reached(n, false);
  std::vector<bool> done(n, false);
  std::vector<std::size_t> parent(n, kNone);
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, Later> open;

  const std::size_t src = g.index(*s);
  const std::size_t dst = g.index(*t);
  best[src] = {};
  reached[src] = true;
  open.push({{}, src});

  const auto& costs = costmap.costs();
  while (!open.empty()) {
    const QueueEntry top = open.top();
    open.pop();
    if (done[top.index]) continue;
    done[top.index] = true;
    if (top.index == dst) break;

    const int cx = static_cast<int>(top.index % static_cast<std::size_t>(g.width));
    const int cy = static_cast<int>(top.index / static_cast<std::size_t>(g.width));
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const CellIndex nb{cx + dx, cy + dy};
        if (!g.contains(nb)) continue;
        const std::size_t ni = g.index(nb);
        if (done[ni] || is_blocked(costs[ni])) continue;
        const bool diagonal = dx != 0 && dy != 0;
        if (diagonal && is_blocked(costs[g.index({cx + dx, cy})]) &&
            is_blocked(costs[g.index({cx, cy + dy})])) {
          continue;  // no corner cutting between two blocked cells
        }
        const ExactCost cand = top.cost + edge_cost(costs[top.index], costs[ni], diagonal);
        if (!reached[ni] || cand < best[ni] || (cand == best[ni] && top.index < parent[ni])) {
          best[ni] = cand;
          reached[ni] = true;
          parent[ni] = top.index;
          open.push({cand, ni});
        }
      }
    }
  }

  if (!done[dst]) return NoPath{NoPathReason::Disconnected};

  auto path = std::make_shared<GridPath>();
  for (std::size_t i = dst; i != kNone; i = parent[i]) {
    path->cells.push_back({static_cast<int>(i % static_cast<std::size_t>(g.width)),
                           static_cast<int>(i / static_cast<std::size_t>(g.width))});
  }
  std::reverse(path->cells.begin(), path->cells.end());
  path->exact_cost = best[dst];
  path->total_cost = best[dst].value();
  path->goal = goal;
  assign_headings(*path, g, goal);
  return PathPtr(std::move(path));
}

ReplanOutcome replan_on_update(const Costmap& costmap, const Pose2D& current, const Pose2D& goal,
                               const PathPtr& previous) {
  bool stale = previous == nullptr || previous->goal != goal;
  if (!stale) {
    for (const auto& c : previous->cells) {
      if (!costmap.geometry().contains(c) || is_blocked(costmap.at(c))) {
        stale = true;
        break;
      }
    }
  }
  if (!stale) {
    return {previous, false};
  }
  return {plan(costmap, current, goal), true};
}

}  // namespace rover
