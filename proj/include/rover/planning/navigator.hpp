/**
 * @file navigator.hpp
 * @brief Goal-directed navigation: global plan on map updates, TEB local
 * planning at the control rate.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rover/mapping/costmap.hpp"
#include "rover/planning/global_planner.hpp"
#include "rover/planning/teb.hpp"
#include "rover/world/rover_model.hpp"

namespace rover {

struct GoalPose {
  double x{0.0};
  double y{0.0};
  double theta{0.0};
  std::string id;

  Pose2D pose() const { return {x, y, theta}; }
  bool operator==(const GoalPose&) const = default;
};

struct NavigatorConfig {
  RoverParams params{};
  TebWeights weights{.d_min_obs = 0.8};
  OptimizeConfig optimize{.outer_iterations = 3, .inner_iterations = 20};
  double lookahead{3.0};  ///< [m] along the global path
  double obstacle_radius{2.0};  ///< [m] obstacle window around the local plan
  double goal_tolerance_xy{0.1};
  double goal_tolerance_theta{0.05};
  double control_period{0.1};
  bool allow_backward{true};
};

enum class NavState { Idle, Active, Reached, NoPath };

const char* to_string(NavState s);

class Navigator {
 public:
  explicit Navigator(NavigatorConfig cfg = {});

  const NavigatorConfig& config() const { return cfg_; }

  void set_goal(const GoalPose& goal);
  void cancel();

  /// Re-plans against a new costmap. Returns true if a new global path was
  /// computed.
  bool on_map(const Costmap& costmap, const Pose2D& pose);

  /// One control step; zero twist unless a goal is being pursued.
  Twist control(const RoverState& state);

  NavState state() const { return state_; }
  const std::optional<GoalPose>& goal() const { return goal_; }
  const PathPtr& path() const { return path_; }
  const TebTrajectory& local_plan() const { return local_; }
  std::optional<NoPathReason> no_path_reason() const { return no_path_; }
  int replans() const { return replans_; }

 private:
  std::vector<Pose2D> local_waypoints(const Pose2D& pose);
  void force_replan(const Pose2D& pose);
  bool local_plan_feasible() const;

  NavigatorConfig cfg_;
  NavState state_{NavState::Idle};
  std::optional<GoalPose> goal_;
  std::optional<Costmap> costmap_;
  PathPtr path_;
  std::size_t progress_{0};
  TebTrajectory local_;
  bool rotate_only_{false};
  std::optional<NoPathReason> no_path_;
  int replans_{0};
};

}  // namespace rover
