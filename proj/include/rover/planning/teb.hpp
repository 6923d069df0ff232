/**
 * @file teb.hpp
 * @brief Timed-elastic-band local planner.
 *
 * A trajectory is a pose sequence s_0..s_n with time intervals dT_0..dT_{n-1}.
 * The end poses are fixed; interior poses and every interval are optimized
 * against a weighted sum of squared soft-constraint residuals:
 *
 *   F = w_time * sum dT_i^2
 *     + w_vel  * sum [ h(|v_i| - v_max)^2 + h(|omega_i| - omega_max)^2 ]
 *     + w_acc  * sum h(|a_i| - a_max)^2
 *     + w_obs  * sum h(d_min - dist(s_i, obstacles))^2
 *     + w_kin  * sum [ (cos th_i + cos th_{i+1}) dy_i - (sin th_i + sin th_{i+1}) dx_i ]^2
 *
 * with h(x) = max(0, x), v_i = |dp_i| / dT_i, omega_i = wrap(th_{i+1} - th_i) / dT_i
 * and a_i = (v_{i+1} - v_i) / ((dT_i + dT_{i+1}) / 2).
 */
#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "rover/core/geometry.hpp"
#include "rover/locomotion/locomotion.hpp"
#include "rover/mapping/costmap.hpp"
#include "rover/planning/global_planner.hpp"

namespace rover {

inline constexpr double kMinDt = 1e-3;

struct TebTrajectory {
  std::vector<Pose2D> poses;
  std::vector<double> dts;

  std::size_t segments() const { return dts.size(); }
  double total_time() const;
  /// Throws std::invalid_argument unless n >= 1, sizes agree and dT > 0.
  void validate() const;
  bool operator==(const TebTrajectory&) const = default;
};

struct TebWeights {
  double w_time{1.0};
  double w_vel{1e5};
  double w_acc{1e5};
  double w_obs{1e5};
  double w_kin{1e7};
  double d_min_obs{0.3};  ///< [m]
};

/// Resamples waypoints (first = current pose, last = goal pose; interior
/// headings ignored) at roughly `spacing` metres. Initial intervals assume
/// half the velocity limits.
TebTrajectory init_trajectory(std::span<const Pose2D> waypoints, const RoverParams& params,
                              double spacing = 0.2);
TebTrajectory init_trajectory(const GridPath& path, const RoverParams& params, double spacing = 0.2);

/// Per-segment kinematic quantities.
double segment_velocity(const TebTrajectory& traj, std::size_t i);
double segment_omega(const TebTrajectory& traj, std::size_t i);
double segment_acceleration(const TebTrajectory& traj, std::size_t i);
double kinematic_residual(const Pose2D& a, const Pose2D& b);

/// Number of free variables: 3 per interior pose plus every interval.
std::size_t free_variable_count(const TebTrajectory& traj);
/// Packs interior poses (x, y, theta) followed by all intervals.
std::vector<double> pack_variables(const TebTrajectory& traj);
void unpack_variables(TebTrajectory& traj, std::span<const double> vars);

struct ObjectiveResult {
  double value{0.0};
  std::vector<double> gradient;  ///< in pack_variables order
};

ObjectiveResult objective(const TebTrajectory& traj, std::span<const Vec2> obstacles,
                          const RoverParams& params, const TebWeights& w);
double objective_value(const TebTrajectory& traj, std::span<const Vec2> obstacles,
                       const RoverParams& params, const TebWeights& w);

struct OptimizeConfig {
  int outer_iterations{4};
  int inner_iterations{60};
  double min_segment{0.1};  ///< [m]
  double max_segment{0.4};  ///< [m]
  double relative_tolerance{1e-13};
};

struct OptimizeReport {
  double initial_value{0.0};
  double final_value{0.0};
  int iterations{0};
  /// Objective after each accepted step, one list per outer iteration (the
  /// first entry of each list is the value before that run).
  std::vector<std::vector<double>> history;
};

class TebError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Descent with a damped Gauss-Newton direction and backtracking line
/// search; intervals are projected onto dT >= kMinDt and poses are inserted
/// or removed between outer iterations to keep segment lengths in
/// [min_segment, max_segment]. End poses are never modified. Throws TebError
/// when the objective becomes non-finite.
TebTrajectory optimize(const TebTrajectory& traj, std::span<const Vec2> obstacles,
                       const RoverParams& params, const TebWeights& w, const OptimizeConfig& cfg = {},
                       OptimizeReport* report = nullptr);

/// Split long segments and merge short ones. Returns true if anything changed.
bool resize_trajectory(TebTrajectory& traj, double min_segment, double max_segment);

/// Velocity command for the first segment, limited against `prev`.
Twist extract_control(const TebTrajectory& traj, const Twist& prev, double control_dt,
                      const RoverParams& params, bool allow_backward = true);

/// Raw first-segment command before limiting.
Twist first_segment_command(const TebTrajectory& traj);

bool check_feasibility(const TebTrajectory& traj, const Costmap& costmap, const Footprint& footprint);

/// Centers of lethal cells within `radius` of any of the given points.
std::vector<Vec2> collect_obstacles(const Costmap& costmap, std::span<const Pose2D> around, double radius = 2.0);

}  // namespace rover
