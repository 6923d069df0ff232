/**
 * @file onboard.hpp
 * @brief The rover side of a session: simulation, mapping, navigation, the
 * deadman watchdog and telemetry production, advanced in fixed steps.
 *
 * Per step, in order: control tick (every `control_every` steps), map
 * update (every `map_every` steps), telemetry, physics.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rover/locomotion/locomotion.hpp"
#include "rover/mapping/costmap.hpp"
#include "rover/mapping/occupancy_grid.hpp"
#include "rover/planning/navigator.hpp"
#include "rover/station/commands.hpp"
#include "rover/telemetry/frame.hpp"
#include "rover/world/camera.hpp"
#include "rover/world/depth_sensor.hpp"
#include "rover/world/rover_model.hpp"
#include "rover/world/scene.hpp"

namespace rover {

struct TelemetryOptions {
  bool image{true};
  bool stereo_cloud{true};
  bool map_cloud{true};
  int pose_every{2};        ///< steps between RoverPose frames (10 Hz)
  int image_every{5};       ///< 4 Hz
  int map_cloud_every{20};  ///< 1 Hz
  int trajectory_every{20};
  int status_every{20};
};

struct OnboardConfig {
  NavigatorConfig nav{};
  DepthSensorConfig depth{};
  CameraConfig camera{};
  InflationConfig inflation{};
  LeverMapping levers{};
  TelemetryOptions telemetry{};
  double map_resolution{0.1};
  double sim_dt{0.05};
  int control_every{2};  ///< 10 Hz
  int map_every{5};      ///< 4 Hz
  double deadman_timeout{1.0};
  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
};

class OnboardSystem {
 public:
  OnboardSystem(WorldScene scene, OnboardConfig cfg, std::uint64_t seed);

  /// Applies an uplinked command at time `now`.
  void receive(const OperatorCommand& cmd, double now);

  /// Advances one step and returns the telemetry produced during it.
  std::vector<TelemetryFrame> step();

  double time() const { return static_cast<double>(step_) * cfg_.sim_dt; }
  std::uint64_t step_count() const { return step_; }
  const RoverState& state() const { return state_; }
  const Twist& commanded() const { return commanded_; }
  ControlMode mode() const { return mode_; }
  const Navigator& navigator() const { return nav_; }
  const OccupancyGrid& grid() const { return grid_; }
  const std::optional<Costmap>& costmap() const { return costmap_; }
  /// Costmap handed to the navigator: unknown cells stay blocked.
  const std::optional<Costmap>& planning_costmap() const { return planning_; }
  const WorldScene& scene() const { return scene_; }
  const OnboardConfig& config() const { return cfg_; }
  int deadman_trips() const { return deadman_trips_; }
  bool deadman_tripped() const { return deadman_active_; }
  std::uint64_t commands_received() const { return commands_received_; }

  /// Status document sent on the NavStatus topic.
  std::string status_json() const;

 private:
  void control_tick(double now);
  void map_tick(double now, std::vector<TelemetryFrame>& out);
  void clear_footprint();
  void emit(std::vector<TelemetryFrame>& out, Topic topic, double stamp, std::vector<std::uint8_t> payload);

  WorldScene scene_;
  OnboardConfig cfg_;
  DepthSensor sensor_;
  Navigator nav_;
  OccupancyGrid grid_;
  std::optional<Costmap> costmap_;
  std::optional<Costmap> planning_;
  std::optional<DepthScan> last_scan_;
  RoverState state_{};
  Twist commanded_{};
  Twist teleop_{};
  ControlMode mode_{ControlMode::Idle};
  double last_teleop_{0.0};
  bool deadman_active_{false};
  int deadman_trips_{0};
  std::uint64_t step_{0};
  std::uint64_t commands_received_{0};
  FrameSequencer seq_;
  std::vector<TelemetryFrame> pending_;
  std::vector<Pose2D> trail_;
  double travelled_{0.0};
  PathPtr sent_path_;
  std::string last_status_;
};

}  // namespace rover
