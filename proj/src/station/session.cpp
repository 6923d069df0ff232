#include "rover/station/session.hpp"

#include <stdexcept>

#include "json.hpp"
#include "rover/telemetry/payloads.hpp"

namespace rover {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Footprint, length, width)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RoverParams, wheel_track, footprint, v_max, a_max, omega_max)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TebWeights, w_time, w_vel, w_acc, w_obs, w_kin, d_min_obs)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(OptimizeConfig, outer_iterations, inner_iterations, min_segment, max_segment,
                                   relative_tolerance)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(NavigatorConfig, params, weights, optimize, lookahead, obstacle_radius,
                                   goal_tolerance_xy, goal_tolerance_theta, control_period, allow_backward)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DepthSensorConfig, fov, ray_count, max_range, range_noise_sigma, rate_hz)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CameraConfig, width, height, hfov, mount_height)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(InflationConfig, inflation_radius, inscribed_radius, decay_rate)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LeverMapping, deadzone)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TelemetryOptions, image, stereo_cloud, map_cloud, pose_every, image_every,
                                   map_cloud_every, trajectory_every, status_every)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(OnboardConfig, nav, depth, camera, inflation, levers, telemetry, map_resolution,
                                   sim_dt, control_every, map_every, deadman_timeout)

NLOHMANN_JSON_SERIALIZE_ENUM(DropPolicy, {{DropPolicy::None, "none"},
                                          {DropPolicy::DropOldestPerTopic, "drop-oldest-per-topic"}})

void to_json(nlohmann::json& j, const LinkConfig& c) {
  j = {{"one_way_delay", c.one_way_delay}, {"drop_policy", c.drop_policy}};
  j["bandwidth_cap"] = c.bandwidth_cap ? nlohmann::json(*c.bandwidth_cap) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, LinkConfig& c) {
  j.at("one_way_delay").get_to(c.one_way_delay);
  j.at("drop_policy").get_to(c.drop_policy);
  const auto& cap = j.at("bandwidth_cap");
  c.bandwidth_cap = cap.is_null() ? std::nullopt : std::optional<double>(cap.get<double>());
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SessionConfig, onboard, link, stats_window, command_horizon, seed)

std::string config_to_json(const SessionConfig& cfg) { return nlohmann::json(cfg).dump(); }

SessionConfig config_from_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text).get<SessionConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("session config: ") + e.what());
  }
}

Session::Session(WorldScene scene, SessionConfig cfg)
    : cfg_(cfg),
      onboard_(std::move(scene), cfg.onboard, cfg.seed),
      ground_(cfg.command_horizon, cfg.stats_window),
      uplink_(cfg.link),
      downlink_(cfg.link) {}

void Session::ingest(const OperatorCommand& command) {
  const double t = now();
  const OperatorCommand cmd = normalize(command);
  if (hooks_.on_command) hooks_.on_command(cmd, t);
  if (const auto* j = std::get_if<JoystickTwist>(&cmd)) {
    const Twist want = levers_to_twist(j->lever_fwd, j->lever_rot, cfg_.onboard.nav.params, cfg_.onboard.levers);
    const bool moving = onboard_.commanded() != Twist{};
    if (want == Twist{}) {
      motion_requested_.reset();
    } else if (!moving && !motion_requested_) {
      motion_requested_ = t;
    }
  } else {
    motion_requested_.reset();
  }
  ground_.submit(cmd, t);
  flush_ground(t);
}

void Session::add_outage(double from, double to) {
  if (hooks_.on_outage) hooks_.on_outage(now(), from, to);
  uplink_.add_outage(from, to);
  downlink_.add_outage(from, to);
}

void Session::flush_ground(double t) {
  for (auto& f : ground_.take_uplink(t, uplink_.is_up(t))) uplink_.send(std::move(f), t);
}

void Session::step() {
  const double t = now();
  flush_ground(t);
  for (const auto& d : uplink_.poll(t + kTimeEpsilon)) {
    onboard_.receive(command_from_json(payload_text(d.frame.payload)), t);
  }
  auto frames = onboard_.step();
  if (motion_requested_ && onboard_.commanded() != Twist{}) {
    latencies_.push_back(t - *motion_requested_);
    motion_requested_.reset();
  }
  for (auto& f : frames) downlink_.send(std::move(f), t);
  for (const auto& d : downlink_.poll(t + kTimeEpsilon)) {
    ground_.on_downlink(d);
    if (hooks_.on_downlink) hooks_.on_downlink(d);
  }
}

void Session::run_until(double t) {
  while (now() < t - kTimeEpsilon) step();
}

}  // namespace rover
