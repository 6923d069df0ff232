/**
 * @file mission.hpp
 * @brief Headless scripted missions: goal and teleop segments followed by
 * assertions about the outcome.
 *
 * Script format (YAML):
 *
 *   name: point-turn
 *   latency: 410ms          # optional, overridable from the command line
 *   bandwidth_cap: 50       # optional [Mb/s]
 *   telemetry: {image: false, camera: [320, 240]}
 *   steps:
 *     - goal: {id: g1, x: 2, y: 2, theta: 3.14159, timeout: 120}
 *     - teleop: {fwd: 1.0, rot: 0.0, duration: 3}
 *     - wait: 2
 *     - link_down: 1.5
 *     - cancel
 *     - estop
 *   assertions:
 *     - goal_reached            # every goal, or {goal_reached: g1}
 *     - final_heading: {theta: 3.14159, tolerance: 0.1}
 *     - final_position: {x: 0, y: 0, tolerance: 0.3}
 *     - return_to_start: 0.3
 *     - no_violations
 *     - no_path: g1
 *     - never_moved
 *     - goal_acked
 *     - no_deadman_trips
 *     - bandwidth_below: 40
 */
#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rover/station/session.hpp"
#include "rover/telemetry/stats.hpp"

namespace rover {

struct GoalStep {
  GoalPose goal;
  double timeout{300.0};
};
struct TeleopStep {
  double fwd{0.0};
  double rot{0.0};
  double duration{0.0};
};
struct WaitStep {
  double duration{0.0};
};
struct LinkDownStep {
  double duration{0.0};
};
struct CancelStep {};
struct EStopStep {};

using MissionStep = std::variant<GoalStep, TeleopStep, WaitStep, LinkDownStep, CancelStep, EStopStep>;

enum class AssertionKind {
  GoalReached,
  NoPath,
  FinalHeading,
  FinalPosition,
  ReturnToStart,
  NoViolations,
  NeverMoved,
  GoalAcked,
  NoDeadmanTrips,
  BandwidthBelow,
};

struct MissionAssertion {
  AssertionKind kind{AssertionKind::NoViolations};
  std::string goal_id;  ///< empty: every goal
  double x{0.0};
  double y{0.0};
  double theta{0.0};
  double tolerance{0.0};
  double mbps{0.0};
};

std::string assertion_name(const MissionAssertion& a);

struct MissionScript {
  std::string name;
  std::optional<double> latency;
  std::optional<double> bandwidth_cap;
  std::optional<bool> image;
  std::optional<int> camera_width;
  std::optional<int> camera_height;
  std::vector<MissionStep> steps;
  std::vector<MissionAssertion> assertions;
};

class MissionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MissionScript parse_mission(const std::string& text, const std::string& origin = "<mission>");
MissionScript load_mission(const std::filesystem::path& path);

struct AssertionResult {
  std::string name;
  bool passed{false};
  std::string detail;
};

struct GoalOutcome {
  std::string id;
  std::string outcome;  ///< reached, no_path, timeout
  double started{0.0};
  double finished{0.0};
};

struct MissionReport {
  std::string mission;
  std::string scene;
  double latency{0.0};
  bool passed{false};
  std::vector<AssertionResult> assertions;
  std::vector<GoalOutcome> goals;
  RoverState start;
  RoverState final_state;
  double sim_time{0.0};
  double wall_seconds{0.0};
  std::uint64_t violations{0};
  double max_displacement{0.0};
  int deadman_trips{0};
  double peak_total_mbps{0.0};
  bool accounting_conserved{true};
  std::uint64_t commands_dropped{0};
  BudgetReport budget;

  std::string to_json() const;
};

struct MissionOptions {
  SessionConfig base{};
  std::optional<double> latency;  ///< overrides the script
  SessionHooks hooks{};
  /// Called with the session after the last step, before assertions.
  std::function<void(const Session&)> on_finish;
};

/// Runs every step, then evaluates every assertion; failures are reported,
/// not thrown.
MissionReport run_mission(const WorldScene& scene, const MissionScript& script, const MissionOptions& options = {});

/// Session configuration a script runs under.
SessionConfig mission_config(const MissionScript& script, const MissionOptions& options);

}  // namespace rover
