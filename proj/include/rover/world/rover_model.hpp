/**
 * @file rover_model.hpp
 * @brief Differential-drive rover state and its exact-arc integrator.
 */
#pragma once

#include "rover/core/geometry.hpp"
#include "rover/locomotion/locomotion.hpp"

namespace rover {

struct RoverState {
  Pose2D pose;
  Twist twist;
  double time{0.0};

  bool operator==(const RoverState&) const = default;
};

/// Below this yaw rate the straight-line update is used.
inline constexpr double kStraightOmega = 1e-9;

/// Integrates a constant twist for dt without applying any limits.
Pose2D integrate_arc(const Pose2D& pose, const Twist& twist, double dt);

/// Limits `cmd` against the current state (limit_twist) and integrates.
/// Throws std::invalid_argument for dt <= 0.
RoverState step_rover(const RoverState& state, const Twist& cmd, double dt,
                      const RoverParams& params);

}  // namespace rover
