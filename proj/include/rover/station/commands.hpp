/**
 * @file commands.hpp
 * @brief Operator commands and their JSON text form.
 *
 * {"type": "joystick", "fwd": f, "rot": r}
 * {"type": "set_goal", "x": .., "y": .., "theta": .., "id": ".."}
 * {"type": "cancel_goal"}
 * {"type": "estop"}
 */
#pragma once

#include <stdexcept>
#include <string>
#include <variant>

#include "rover/planning/navigator.hpp"

namespace rover {

struct JoystickTwist {
  double lever_fwd{0.0};
  double lever_rot{0.0};
  bool operator==(const JoystickTwist&) const = default;
};

struct SetGoal {
  GoalPose goal;
  bool operator==(const SetGoal&) const = default;
};

struct CancelGoal {
  bool operator==(const CancelGoal&) const = default;
};

struct EmergencyStop {
  bool operator==(const EmergencyStop&) const = default;
};

using OperatorCommand = std::variant<JoystickTwist, SetGoal, CancelGoal, EmergencyStop>;

class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lever values are clamped to [-1, 1]; goal headings are wrapped.
OperatorCommand normalize(OperatorCommand cmd);

std::string command_to_json(const OperatorCommand& cmd);
/// Throws CommandError on malformed input.
OperatorCommand command_from_json(const std::string& text);

const char* command_name(const OperatorCommand& cmd);

enum class ControlMode { Idle, Teleop, Autonomous };

const char* to_string(ControlMode m);

/// Mode after applying `cmd`. EmergencyStop and CancelGoal always lead to
/// Idle.
ControlMode next_mode(ControlMode current, const OperatorCommand& cmd);

}  // namespace rover
