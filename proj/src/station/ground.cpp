#include "rover/station/ground.hpp"

#include <algorithm>

#include "json.hpp"
#include "rover/telemetry/payloads.hpp"

namespace rover {

GroundStation::GroundStation(double horizon, double stats_window) : horizon_(horizon), stats_(stats_window) {}

void GroundStation::submit(const OperatorCommand& command, double now) {
  const OperatorCommand cmd = normalize(command);
  if (const auto* g = std::get_if<SetGoal>(&cmd)) goals_sent_.push_back(g->goal.id);
  if (std::holds_alternative<JoystickTwist>(cmd)) {
    std::erase_if(queue_, [](const Queued& q) { return std::holds_alternative<JoystickTwist>(q.cmd); });
  }
  queue_.push_back({cmd, now});
}

std::vector<TelemetryFrame> GroundStation::take_uplink(double now, bool link_up) {
  std::erase_if(queue_, [&](const Queued& q) {
    if (std::holds_alternative<EmergencyStop>(q.cmd) || now - q.stamp <= horizon_) return false;
    ++dropped_;
    notices_.push_back({now, std::string("dropped stale ") + command_name(q.cmd) + " command queued at " +
                                 std::to_string(q.stamp) + " s"});
    return true;
  });
  std::vector<TelemetryFrame> out;
  if (!link_up) return out;
  for (const auto& q : queue_) {
    out.push_back(seq_.make(Topic::OperatorCommand, q.stamp, text_payload(command_to_json(q.cmd))));
  }
  queue_.clear();
  return out;
}

void GroundStation::on_downlink(const Delivery& d) {
  account(stats_, d.frame, d.delivered);
  switch (d.frame.topic) {
    case Topic::RoverPose:
      pose_ = decode_pose(d.frame.payload);
      break;
    case Topic::GoalAck:
      ++acks_[decode_goal_ack(d.frame.payload).id];
      break;
    case Topic::NavStatus: {
      const auto j = nlohmann::json::parse(payload_text(d.frame.payload));
      status_.mode = j.value("mode", "");
      status_.nav_state = j.value("nav_state", "");
      status_.goal_id = j.value("goal_id", "");
      status_.no_path_reason = j.value("no_path_reason", "");
      status_.deadman_trips = j.value("deadman_trips", 0);
      status_.stamp = d.frame.stamp;
      break;
    }
    default:
      break;
  }
}

std::vector<std::string> GroundStation::pending_goals() const {
  std::vector<std::string> out;
  for (const auto& id : goals_sent_) {
    const auto it = acks_.find(id);
    if (it == acks_.end() && std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  return out;
}

}  // namespace rover
