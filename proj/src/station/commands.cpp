#include "rover/station/commands.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace rover {

using nlohmann::json;

OperatorCommand normalize(OperatorCommand cmd) {
  if (auto* j = std::get_if<JoystickTwist>(&cmd)) {
    j->lever_fwd = std::clamp(j->lever_fwd, -1.0, 1.0);
    j->lever_rot = std::clamp(j->lever_rot, -1.0, 1.0);
  } else if (auto* g = std::get_if<SetGoal>(&cmd)) {
    g->goal.theta = wrap_angle(g->goal.theta);
  }
  return cmd;
}

std::string command_to_json(const OperatorCommand& cmd) {
  json j;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, JoystickTwist>) {
          j = {{"type", "joystick"}, {"fwd", c.lever_fwd}, {"rot", c.lever_rot}};
        } else if constexpr (std::is_same_v<T, SetGoal>) {
          j = {{"type", "set_goal"}, {"x", c.goal.x}, {"y", c.goal.y}, {"theta", c.goal.theta}, {"id", c.goal.id}};
        } else if constexpr (std::is_same_v<T, CancelGoal>) {
          j = {{"type", "cancel_goal"}};
        } else {
          j = {{"type", "estop"}};
        }
      },
      cmd);
  return j.dump();
}

namespace {

double finite_number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw CommandError(std::string("missing numeric field '") + key + "'");
  }
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) throw CommandError(std::string("field '") + key + "' is not finite");
  return v;
}

}  // namespace

OperatorCommand command_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CommandError(std::string("malformed command: ") + e.what());
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw CommandError("command needs a string 'type'");
  }
  const auto type = j["type"].get<std::string>();
  if (type == "joystick") {
    return normalize(JoystickTwist{finite_number(j, "fwd"), finite_number(j, "rot")});
  }
  if (type == "set_goal") {
    GoalPose g{finite_number(j, "x"), finite_number(j, "y"), finite_number(j, "theta"), ""};
    if (j.contains("id")) {
      if (!j["id"].is_string()) throw CommandError("goal id must be a string");
      g.id = j["id"].get<std::string>();
    }
    return normalize(SetGoal{g});
  }
  if (type == "cancel_goal") return CancelGoal{};
  if (type == "estop") return EmergencyStop{};
  throw CommandError("unknown command type '" + type + "'");
}

const char* command_name(const OperatorCommand& cmd) {
  switch (cmd.index()) {
    case 0: return "joystick";
    case 1: return "set_goal";
    case 2: return "cancel_goal";
    default: return "estop";
  }
}

const char* to_string(ControlMode m) {
  switch (m) {
    case ControlMode::Idle: return "idle";
    case ControlMode::Teleop: return "teleop";
    case ControlMode::Autonomous: return "autonomous";
  }
  return "?";
}

ControlMode next_mode(ControlMode, const OperatorCommand& cmd) {
  switch (cmd.index()) {
    case 0: return ControlMode::Teleop;
    case 1: return ControlMode::Autonomous;
    default: return ControlMode::Idle;
  }
}

}  // namespace rover
