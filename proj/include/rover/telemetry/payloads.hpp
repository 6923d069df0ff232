/**
 * @file payloads.hpp
 * @brief Binary payload layouts carried inside telemetry frames.
 *
 * All numbers little-endian. Pose lists are [count u32] followed by
 * (x, y, theta) f64 triples.
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rover/mapping/costmap.hpp"
#include "rover/mapping/occupancy_grid.hpp"
#include "rover/planning/teb.hpp"
#include "rover/world/camera.hpp"
#include "rover/world/depth_sensor.hpp"
#include "rover/world/rover_model.hpp"

namespace rover {

/// RoverPose: time, x, y, theta, v, omega as f64.
std::vector<std::uint8_t> encode_pose(const RoverState& state);
RoverState decode_pose(std::span<const std::uint8_t> payload);

/// CostMap2D: resolution f64, width u32, height u32, origin x/y f64,
/// stamp f64, then width*height cost bytes, row-major from row 0.
std::vector<std::uint8_t> encode_costmap(const Costmap& costmap);
Costmap decode_costmap(std::span<const std::uint8_t> payload);

/// Trajectory and GlobalPlan: pose list followed by a cost f64.
struct PathPayload {
  std::vector<Pose2D> poses;
  double cost{0.0};
  bool operator==(const PathPayload&) const = default;
};
std::vector<std::uint8_t> encode_path(const PathPayload& path);
PathPayload decode_path(std::span<const std::uint8_t> payload);

/// LocalPlan: pose list followed by one f64 velocity per segment.
struct LocalPlanPayload {
  std::vector<Pose2D> poses;
  std::vector<double> velocities;
  bool operator==(const LocalPlanPayload&) const = default;
};
std::vector<std::uint8_t> encode_local_plan(const TebTrajectory& traj);
LocalPlanPayload decode_local_plan(std::span<const std::uint8_t> payload);

/// Cloud point: x, y, z f32 and packed 0x00RRGGBB u32.
struct CloudPoint {
  float x{0}, y{0}, z{0};
  std::uint32_t rgb{0};
  bool operator==(const CloudPoint&) const = default;
};
std::vector<std::uint8_t> encode_cloud(std::span<const CloudPoint> points);
std::vector<CloudPoint> decode_cloud(std::span<const std::uint8_t> payload);

/// Points seen by the latest scan: obstacle faces up to the hit height and
/// ground samples along each ray, in world coordinates.
std::vector<CloudPoint> stereo_cloud(const DepthScan& scan);
/// Accumulated map: one ground point per Free cell and a short column per
/// Occupied cell.
std::vector<CloudPoint> map_cloud(const OccupancyGrid& grid);

/// ImageLeft: baseline JPEG.
std::vector<std::uint8_t> encode_jpeg(const Image& image, int quality = 80);
Image decode_jpeg(std::span<const std::uint8_t> jpeg);

/// GoalAck: id string, goal x/y/theta f64.
struct GoalAck {
  std::string id;
  Pose2D goal;
  bool operator==(const GoalAck&) const = default;
};
std::vector<std::uint8_t> encode_goal_ack(const GoalAck& ack);
GoalAck decode_goal_ack(std::span<const std::uint8_t> payload);

/// Payload bytes of a UTF-8 text (JSON) message.
std::vector<std::uint8_t> text_payload(const std::string& text);
std::string payload_text(std::span<const std::uint8_t> payload);

}  // namespace rover
