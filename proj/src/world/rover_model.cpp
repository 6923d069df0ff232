#include "rover/world/rover_model.hpp"

#include <cmath>
#include <stdexcept>

namespace rover {

Pose2D integrate_arc(const Pose2D& pose, const Twist& twist, double dt) {
  const double v = twist.v;
  const double w = twist.omega;
  Pose2D next;
  if (std::abs(w) < kStraightOmega) {
    next.x = pose.x + v * std::cos(pose.theta) * dt;
    next.y = pose.y + v * std::sin(pose.theta) * dt;
    next.theta = pose.theta;
    return next;
  }
  const double theta_next = pose.theta + w * dt;
  if (v == 0.0) {
    next.x = pose.x;
    next.y = pose.y;
  } else {
    const double r = v / w;
    next.x = pose.x + r * (std::sin(theta_next) - std::sin(pose.theta));
    next.y = pose.y - r * (std::cos(theta_next) - std::cos(pose.theta));
  }
  next.theta = wrap_angle(theta_next);
  return next;
}

RoverState step_rover(const RoverState& state, const Twist& cmd, double dt,
                      const RoverParams& params) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("step_rover: dt must be positive");
  }
  const Twist applied = limit_twist(state.twist, cmd, dt, params);
  RoverState next;
  next.pose = integrate_arc(state.pose, applied, dt);
  next.twist = applied;
  next.time = state.time + dt;
  return next;
}

}  // namespace rover
