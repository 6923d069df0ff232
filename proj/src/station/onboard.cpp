#include "rover/station/onboard.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"
#include "rover/telemetry/payloads.hpp"

namespace rover {

void OnboardConfig::validate() const {
  nav.params.validate();
  inflation.validate();
  const auto& t = telemetry;
  if (!(sim_dt > 0.0) || !(map_resolution > 0.0) || !(deadman_timeout > 0.0) || control_every < 1 ||
      map_every < 1 || t.pose_every < 1 || t.image_every < 1 || t.map_cloud_every < 1 ||
      t.trajectory_every < 1 || t.status_every < 1) {
    throw std::invalid_argument("onboard config: rates, periods and timeouts must be positive");
  }
}

OnboardSystem::OnboardSystem(WorldScene scene, OnboardConfig cfg, std::uint64_t seed)
    : scene_(std::move(scene)),
      cfg_(cfg),
      sensor_(cfg.depth, seed),
      nav_(cfg.nav),
      grid_(GridGeometry::covering(scene_.bounds.min, scene_.bounds.max, cfg.map_resolution)) {
  cfg_.validate();
  scene_.validate();
  state_.pose = scene_.start;
  state_.pose.theta = wrap_angle(state_.pose.theta);
  trail_.push_back(state_.pose);
}

void OnboardSystem::receive(const OperatorCommand& command, double now) {
  ++commands_received_;
  const OperatorCommand cmd = normalize(command);
  mode_ = next_mode(mode_, cmd);
  if (const auto* j = std::get_if<JoystickTwist>(&cmd)) {
    if (nav_.goal()) nav_.cancel();
    teleop_ = levers_to_twist(j->lever_fwd, j->lever_rot, cfg_.nav.params, cfg_.levers);
    last_teleop_ = now;
    deadman_active_ = false;
  } else if (const auto* g = std::get_if<SetGoal>(&cmd)) {
    nav_.set_goal(g->goal);
    if (planning_) nav_.on_map(*planning_, state_.pose);
    const GoalPose& goal = *nav_.goal();
    pending_.push_back(seq_.make(Topic::GoalAck, now, encode_goal_ack({goal.id, goal.pose()})));
  } else {
    nav_.cancel();
    teleop_ = {};
    if (std::holds_alternative<EmergencyStop>(cmd)) commanded_ = {};
  }
}

void OnboardSystem::control_tick(double now) {
  switch (mode_) {
    case ControlMode::Teleop:
      if (now - last_teleop_ >= cfg_.deadman_timeout - 1e-9) {
        if (!deadman_active_) ++deadman_trips_;
        deadman_active_ = true;
        commanded_ = {};
      } else {
        commanded_ = teleop_;
      }
      break;
    case ControlMode::Autonomous:
      commanded_ = nav_.control(state_);
      if (nav_.state() == NavState::Reached) {
        mode_ = ControlMode::Idle;
        commanded_ = {};
      }
      break;
    case ControlMode::Idle:
      commanded_ = {};
      break;
  }
}

void OnboardSystem::clear_footprint() {
  // the ground under the rover is known to be traversable
  const auto poly = footprint_polygon(state_.pose, cfg_.nav.params.footprint);
  const auto& g = grid_.geometry();
  Vec2 lo = poly.front(), hi = poly.front();
  for (const auto& p : poly) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const CellIndex a = g.cell_of(lo);
  const CellIndex b = g.cell_of(hi);
  for (int y = std::max(a.y, 0); y <= std::min(b.y, g.height - 1); ++y) {
    for (int x = std::max(a.x, 0); x <= std::min(b.x, g.width - 1); ++x) {
      const Vec2 c = g.center_of({x, y});
      bool inside = true;
      for (std::size_t i = 0; i < poly.size() && inside; ++i) {
        const Vec2& p0 = poly[i];
        const Vec2& p1 = poly[(i + 1) % poly.size()];
        inside = (p1 - p0).cross(c - p0) >= 0.0;
      }
      if (inside && grid_.at({x, y}) == CellState::Unknown) grid_.set({x, y}, CellState::Free);
    }
  }
  if (const auto c = g.cell_at(state_.pose.position()); c && grid_.at(*c) == CellState::Unknown) {
    grid_.set(*c, CellState::Free);
  }
}

void OnboardSystem::map_tick(double now, std::vector<TelemetryFrame>& out) {
  DepthScan scan = sensor_.sense(state_, scene_);
  scan.timestamp = now;
  integrate_scan(grid_, scan);
  clear_footprint();
  grid_.set_stamp(now);
  costmap_ = inflate(grid_, cfg_.inflation);
  planning_ = mask_unknown(*costmap_, grid_);
  nav_.on_map(*planning_, state_.pose);
  emit(out, Topic::CostMap2D, now, encode_costmap(*costmap_));
  if (cfg_.telemetry.stereo_cloud) {
    const auto cloud = stereo_cloud(scan);
    emit(out, Topic::StereoCloud, now, encode_cloud(cloud));
  }
  last_scan_ = std::move(scan);
}

void OnboardSystem::emit(std::vector<TelemetryFrame>& out, Topic topic, double stamp,
                         std::vector<std::uint8_t> payload) {
  out.push_back(seq_.make(topic, stamp, std::move(payload)));
}

std::string OnboardSystem::status_json() const {
  nlohmann::json j{{"mode", to_string(mode_)},
                   {"nav_state", to_string(nav_.state())},
                   {"goal_id", nav_.goal() ? nav_.goal()->id : ""},
                   {"deadman_trips", deadman_trips_},
                   {"deadman_active", deadman_active_},
                   {"replans", nav_.replans()}};
  j["no_path_reason"] = nav_.no_path_reason() ? to_string(*nav_.no_path_reason()) : "";
  return j.dump();
}

std::vector<TelemetryFrame> OnboardSystem::step() {
  const double now = time();
  const auto k = step_;
  const auto& tel = cfg_.telemetry;
  std::vector<TelemetryFrame> out = std::move(pending_);
  pending_.clear();

  const bool control = k % static_cast<std::uint64_t>(cfg_.control_every) == 0;
  if (control) control_tick(now);
  if (k % static_cast<std::uint64_t>(cfg_.map_every) == 0) map_tick(now, out);

  if (nav_.path() && nav_.path() != sent_path_) {
    sent_path_ = nav_.path();
    emit(out, Topic::GlobalPlan, now, encode_path({sent_path_->world_poses, sent_path_->total_cost}));
  }
  if (control && mode_ == ControlMode::Autonomous && !nav_.local_plan().poses.empty()) {
    emit(out, Topic::LocalPlan, now, encode_local_plan(nav_.local_plan()));
  }
  if (k % static_cast<std::uint64_t>(tel.pose_every) == 0) emit(out, Topic::RoverPose, now, encode_pose(state_));
  if (tel.image && k % static_cast<std::uint64_t>(tel.image_every) == 0) {
    emit(out, Topic::ImageLeft, now, encode_jpeg(render_camera(state_, scene_, cfg_.camera), 80));
  }
  if (tel.map_cloud && k % static_cast<std::uint64_t>(tel.map_cloud_every) == 0) {
    const auto cloud = map_cloud(grid_);
    emit(out, Topic::MapCloud, now, encode_cloud(cloud));
  }
  if (k % static_cast<std::uint64_t>(tel.trajectory_every) == 0) {
    std::vector<Pose2D> poses = trail_;
    poses.push_back(state_.pose);
    emit(out, Topic::Trajectory, now, encode_path({std::move(poses), travelled_}));
  }
  const std::string status = status_json();
  if (status != last_status_ || k % static_cast<std::uint64_t>(tel.status_every) == 0) {
    last_status_ = status;
    auto doc = nlohmann::json::parse(status);
    doc["time"] = now;
    emit(out, Topic::NavStatus, now, text_payload(doc.dump()));
  }

  const Pose2D before = state_.pose;
  state_ = step_rover(state_, commanded_, cfg_.sim_dt, cfg_.nav.params);
  travelled_ += distance(before.position(), state_.pose.position());
  ++step_;
  state_.time = time();
  if (step_ % static_cast<std::uint64_t>(tel.trajectory_every) == 0) trail_.push_back(state_.pose);
  return out;
}

}  // namespace rover
