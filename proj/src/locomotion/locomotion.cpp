#include "rover/locomotion/locomotion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rover {

namespace {

void require_track(double wheel_track) {
  if (!(wheel_track > 0.0)) {
    throw std::invalid_argument("wheel track must be positive");
  }
}

double apply_deadzone(double lever, double deadzone) {
  lever = std::clamp(lever, -1.0, 1.0);
  return std::abs(lever) < deadzone ? 0.0 : lever;
}

}  // namespace

void RoverParams::validate() const {
  if (!(wheel_track > 0.0) || !(footprint.length > 0.0) || !(footprint.width > 0.0) ||
      !(v_max > 0.0) || !(a_max > 0.0) || !(omega_max > 0.0)) {
    throw std::invalid_argument("rover parameters must all be positive");
  }
}

WheelSpeeds twist_to_wheels(const Twist& cmd, double wheel_track) {
  require_track(wheel_track);
  const double half = cmd.omega * wheel_track / 2.0;
  return {cmd.v - half, cmd.v + half};
}

Twist wheels_to_twist(const WheelSpeeds& ws, double wheel_track) {
  require_track(wheel_track);
  return {(ws.v_left + ws.v_right) / 2.0, (ws.v_right - ws.v_left) / wheel_track};
}

Twist limit_twist(const Twist& prev, const Twist& cmd, double dt, const RoverParams& params) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("limit_twist: dt must be positive");
  }
  Twist out;
  out.v = std::clamp(cmd.v, -params.v_max, params.v_max);
  out.omega = std::clamp(cmd.omega, -params.omega_max, params.omega_max);
  const double dv_max = params.a_max * dt;
  out.v = std::clamp(out.v, prev.v - dv_max, prev.v + dv_max);
  return out;
}

Twist levers_to_twist(double lever_fwd, double lever_rot, const RoverParams& params,
                      const LeverMapping& mapping) {
  return {apply_deadzone(lever_fwd, mapping.deadzone) * params.v_max,
          apply_deadzone(lever_rot, mapping.deadzone) * params.omega_max};
}

}  // namespace rover
