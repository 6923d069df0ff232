/**
 * @file locomotion.hpp
 * @brief Skid-steer command mixing and the velocity/acceleration governor.
 */
#pragma once

#include "rover/core/geometry.hpp"

namespace rover {

/// Left and right wheel-bank speeds [m/s].
struct WheelSpeeds {
  double v_left{0.0};
  double v_right{0.0};

  constexpr bool operator==(const WheelSpeeds&) const = default;
};

/// Kinematic limits and geometry of the rover.
struct RoverParams {
  double wheel_track{0.8};  ///< b [m], lateral distance between wheel banks
  Footprint footprint{};
  double v_max{0.1};      ///< [m/s]
  double a_max{0.3};      ///< [m/s^2]
  double omega_max{0.3};  ///< [rad/s]

  /// Throws std::invalid_argument when a limit is non-positive.
  void validate() const;
};

/// V_l = V - omega*b/2, V_r = V + omega*b/2.
WheelSpeeds twist_to_wheels(const Twist& cmd, double wheel_track);

/// Inverse mixing: V = (V_l+V_r)/2, omega = (V_r-V_l)/b.
Twist wheels_to_twist(const WheelSpeeds& ws, double wheel_track);

/// Clamps |v| and |omega| to the rover limits, then slews v so that
/// |v - prev.v| <= a_max*dt.
Twist limit_twist(const Twist& prev, const Twist& cmd, double dt, const RoverParams& params);

/// Joystick lever pair to twist. Levers are clamped to [-1, 1]; magnitudes
/// below the deadzone map to zero, the rest scales linearly to the limits.
struct LeverMapping {
  double deadzone{0.05};
};

Twist levers_to_twist(double lever_fwd, double lever_rot, const RoverParams& params,
                      const LeverMapping& mapping = {});

}  // namespace rover
