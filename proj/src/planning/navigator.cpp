#include "rover/planning/navigator.hpp"

#include <cmath>
#include <limits>

namespace rover {

const char* to_string(NavState s) {
  switch (s) {
    case NavState::Idle: return "idle";
    case NavState::Active: return "active";
    case NavState::Reached: return "reached";
    case NavState::NoPath: return "no_path";
  }
  return "?";
}

Navigator::Navigator(NavigatorConfig cfg) : cfg_(cfg) { cfg_.params.validate(); }

void Navigator::set_goal(const GoalPose& goal) {
  goal_ = goal;
  goal_->theta = wrap_angle(goal_->theta);
  state_ = NavState::Active;
  path_.reset();
  progress_ = 0;
  rotate_only_ = false;
  no_path_.reset();
  local_ = {};
}

void Navigator::cancel() {
  goal_.reset();
  state_ = NavState::Idle;
  path_.reset();
  local_ = {};
  no_path_.reset();
}

bool Navigator::on_map(const Costmap& costmap, const Pose2D& pose) {
  costmap_ = costmap;
  if (!goal_ || state_ == NavState::Reached || state_ == NavState::Idle) return false;
  const auto outcome = replan_on_update(costmap, pose, goal_->pose(), path_);
  if (!outcome.replanned) return false;
  ++replans_;
  if (const auto* p = std::get_if<PathPtr>(&outcome.result)) {
    path_ = *p;
    progress_ = 0;
    no_path_.reset();
    state_ = NavState::Active;
  } else {
    // keep the goal: a later map may open a path, but stop meanwhile
    path_.reset();
    no_path_ = std::get<NoPath>(outcome.result).reason;
    state_ = NavState::NoPath;
  }
  return true;
}

void Navigator::force_replan(const Pose2D& pose) {
  if (costmap_) {
    path_.reset();
    on_map(*costmap_, pose);
  }
}

std::vector<Pose2D> Navigator::local_waypoints(const Pose2D& pose) {
  const auto& poses = path_->world_poses;
  // progress only moves forward along the current path
  double best = std::numeric_limits<double>::infinity();
  std::size_t closest = progress_;
  for (std::size_t i = progress_; i < poses.size(); ++i) {
    const double d = distance(poses[i].position(), pose.position());
    if (d < best) {
      best = d;
      closest = i;
    }
    if (d > best + 2.0 * cfg_.lookahead) break;
  }
  progress_ = closest;

  // the local plan ends on the goal position facing along the approach;
  // the final heading is taken by rotating in place once there
  std::vector<Pose2D> wp{pose};
  double along = 0.0;
  Vec2 prev = pose.position();
  for (std::size_t i = closest + 1; i + 1 < poses.size(); ++i) {
    along += distance(prev, poses[i].position());
    prev = poses[i].position();
    wp.push_back(poses[i]);
    if (along >= cfg_.lookahead) return wp;
  }
  const Vec2 g{goal_->x, goal_->y};
  const Vec2 from = wp.back().position();
  const double approach = distance(from, g) > 1e-9 ? std::atan2(g.y - from.y, g.x - from.x) : pose.theta;
  wp.push_back({g.x, g.y, approach});
  return wp;
}

bool Navigator::local_plan_feasible() const {
  // the first pose is where the rover already is
  for (std::size_t i = 1; i < local_.poses.size(); ++i) {
    if (is_pose_admissible(*costmap_, local_.poses[i], cfg_.params.footprint) != Admissibility::Admissible) {
      return false;
    }
  }
  return true;
}

Twist Navigator::control(const RoverState& state) {
  if (!goal_ || state_ != NavState::Active || !path_) {
    local_ = {};
    return {};
  }
  const Pose2D& pose = state.pose;
  const double dxy = distance(pose.position(), {goal_->x, goal_->y});
  const double dth = std::abs(wrap_angle(goal_->theta - pose.theta));
  if (dxy <= cfg_.goal_tolerance_xy && dth <= cfg_.goal_tolerance_theta) {
    state_ = NavState::Reached;
    local_ = {};
    return {};
  }
  // once in position, finish with a rotation in place
  if (dxy <= cfg_.goal_tolerance_xy) rotate_only_ = true;

  std::vector<Pose2D> wp;
  if (rotate_only_) {
    wp = {pose, {pose.x, pose.y, goal_->theta}};
  } else {
    wp = local_waypoints(pose);
  }
  const TebTrajectory init = init_trajectory(wp, cfg_.params);
  std::vector<Vec2> obstacles;
  if (costmap_) obstacles = collect_obstacles(*costmap_, init.poses, cfg_.obstacle_radius);
  local_ = optimize(init, obstacles, cfg_.params, cfg_.weights, cfg_.optimize);

  if (costmap_ && !rotate_only_ && !local_plan_feasible()) {
    // the local plan crosses forbidden cells: stop and ask for a new global path
    force_replan(pose);
    local_ = {};
    return {};
  }
  return extract_control(local_, state.twist, cfg_.control_period, cfg_.params, cfg_.allow_backward);
}

}  // namespace rover
