/**
 * @file ground.hpp
 * @brief Base-station side: command uplink policy, telemetry accounting and
 * a mirror of the rover status.
 */
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rover/station/commands.hpp"
#include "rover/telemetry/link.hpp"
#include "rover/telemetry/stats.hpp"
#include "rover/world/rover_model.hpp"

namespace rover {

struct GroundNotice {
  double stamp{0.0};
  std::string text;
};

/// Last NavStatus document seen on the downlink.
struct StatusMirror {
  std::string mode{"idle"};
  std::string nav_state{"idle"};
  std::string goal_id;
  std::string no_path_reason;
  int deadman_trips{0};
  double stamp{-1.0};
};

/// Commands wait on the ground while the uplink is down. Joystick commands
/// are latest-wins; anything older than `horizon` is dropped with a notice,
/// except emergency stops, which are never dropped.
class GroundStation {
 public:
  explicit GroundStation(double horizon = 1.0, double stats_window = 1.0);

  void submit(const OperatorCommand& cmd, double now);
  /// Frames to put on the uplink at `now`; empty while the link is down.
  std::vector<TelemetryFrame> take_uplink(double now, bool link_up);
  void on_downlink(const Delivery& delivery);

  const TopicStats& stats() const { return stats_; }
  BudgetReport budget(double now) const { return budget_report(stats_, now); }
  const StatusMirror& status() const { return status_; }
  const std::optional<RoverState>& pose() const { return pose_; }
  const std::vector<GroundNotice>& notices() const { return notices_; }
  std::size_t queued() const { return queue_.size(); }
  std::uint64_t commands_dropped() const { return dropped_; }

  /// Goal ids sent but not yet acknowledged.
  std::vector<std::string> pending_goals() const;
  /// Acknowledgements received per goal id.
  const std::map<std::string, int>& acks() const { return acks_; }
  /// Goal ids in submission order.
  const std::vector<std::string>& goals_sent() const { return goals_sent_; }

 private:
  struct Queued {
    OperatorCommand cmd;
    double stamp;
  };

  double horizon_;
  TopicStats stats_;
  FrameSequencer seq_;
  std::vector<Queued> queue_;
  std::vector<GroundNotice> notices_;
  std::uint64_t dropped_{0};
  StatusMirror status_;
  std::optional<RoverState> pose_;
  std::map<std::string, int> acks_;
  std::vector<std::string> goals_sent_;
};

}  // namespace rover
