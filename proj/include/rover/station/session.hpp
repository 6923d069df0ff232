/**
 * @file session.hpp
 * @brief One operator session: ground station, uplink and downlink, and the
 * onboard system, all advanced in simulated time.
 *
 * Within a step at time t: queued ground commands go onto the uplink,
 * uplink deliveries due by t reach the rover, the rover steps, its
 * telemetry goes onto the downlink and downlink deliveries due by t reach
 * the ground.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rover/station/ground.hpp"
#include "rover/station/onboard.hpp"
#include "rover/telemetry/link.hpp"

namespace rover {

struct SessionConfig {
  OnboardConfig onboard{};
  LinkConfig link{};  ///< applied to both directions
  double stats_window{1.0};
  double command_horizon{1.0};
  std::uint64_t seed{0};
};

std::string config_to_json(const SessionConfig& cfg);
/// Throws std::invalid_argument on missing or malformed fields.
SessionConfig config_from_json(const std::string& text);

/// Tolerance when comparing delivery times against step times.
inline constexpr double kTimeEpsilon = 1e-9;

struct SessionHooks {
  std::function<void(const OperatorCommand&, double)> on_command;
  std::function<void(double now, double from, double to)> on_outage;
  std::function<void(const Delivery&)> on_downlink;
};

class Session {
 public:
  Session(WorldScene scene, SessionConfig cfg);

  void set_hooks(SessionHooks hooks) { hooks_ = std::move(hooks); }

  /// Operator command entering the ground station at now().
  void ingest(const OperatorCommand& cmd);
  /// Both directions unavailable for [from, to).
  void add_outage(double from, double to);
  void step();
  /// Steps until now() >= t.
  void run_until(double t);

  double now() const { return onboard_.time(); }
  const SessionConfig& config() const { return cfg_; }
  const OnboardSystem& onboard() const { return onboard_; }
  const GroundStation& ground() const { return ground_; }
  const LinkChannel& uplink() const { return uplink_; }
  const LinkChannel& downlink() const { return downlink_; }

  /// Delay from each motion-starting joystick command entering the ground
  /// station to the rover commanding a nonzero twist.
  const std::vector<double>& motion_latencies() const { return latencies_; }

 private:
  void flush_ground(double now);

  SessionConfig cfg_;
  OnboardSystem onboard_;
  GroundStation ground_;
  LinkChannel uplink_;
  LinkChannel downlink_;
  SessionHooks hooks_;
  std::optional<double> motion_requested_;
  std::vector<double> latencies_;
};

}  // namespace rover
