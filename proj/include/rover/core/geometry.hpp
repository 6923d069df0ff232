/**
 * @file geometry.hpp
 * @brief Planar pose, velocity and angle helpers shared by every module.
 */
#pragma once

#include <cmath>
#include <numbers>

namespace rover {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  constexpr double cross(const Vec2& o) const { return x * o.y - y * o.x; }
};

/// Rover pose in the world frame: position [m] and heading [rad].
struct Pose2D {
  double x{0.0};
  double y{0.0};
  double theta{0.0};

  constexpr Vec2 position() const { return {x, y}; }
  constexpr bool operator==(const Pose2D&) const = default;
};

/// Body-frame velocity command: forward speed V [m/s], yaw rate omega [rad/s].
struct Twist {
  double v{0.0};
  double omega{0.0};

  constexpr bool operator==(const Twist&) const = default;
};

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(a, two_pi);  // [-pi, pi]
  if (r <= -std::numbers::pi) {
    r += two_pi;
  }
  return r;
}

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Axis-aligned rectangle footprint centered on the pose, length along heading.
struct Footprint {
  double length{1.0};
  double width{0.82};
};

}  // namespace rover
