/**
 * @file link.hpp
 * @brief Simulated-time communication link with delay, bandwidth cap and
 * outages.
 */
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "rover/telemetry/frame.hpp"

namespace rover {

enum class DropPolicy { None, DropOldestPerTopic };

struct LinkConfig {
  double one_way_delay{0.0};  ///< [s]
  std::optional<double> bandwidth_cap;  ///< [Mb/s]
  DropPolicy drop_policy{DropPolicy::DropOldestPerTopic};

  void validate() const;
};

/// Parses "0", "410ms", "0.41", "0.41s" or "250ms" into seconds.
double parse_latency(const std::string& text);

struct Delivery {
  TelemetryFrame frame;
  double sent{0.0};
  double delivered{0.0};
};

/// Frames enter with `send` and leave with `poll` once their delivery time
/// has come. With a bandwidth cap the link serializes frames one at a time in
/// send order; without one, frames do not contend. While a frame of a
/// droppable topic waits for the link, a newer frame of the same topic
/// supersedes it. During an outage nothing starts transmitting.
class LinkChannel {
 public:
  explicit LinkChannel(LinkConfig cfg = {});

  const LinkConfig& config() const { return cfg_; }

  void send(TelemetryFrame frame, double now);
  std::vector<Delivery> poll(double now);

  /// Link unavailable for [from, to).
  void add_outage(double from, double to);
  bool is_up(double t) const;

  std::uint64_t frames_sent() const { return sent_; }
  std::uint64_t frames_dropped() const { return dropped_; }
  std::uint64_t frames_delivered() const { return delivered_; }
  std::uint64_t bytes_delivered() const { return bytes_delivered_; }
  std::size_t queued() const { return waiting_.size() + in_flight_.size(); }

 private:
  struct Pending {
    TelemetryFrame frame;
    double sent;
  };

  double next_up(double t) const;
  void advance(double now);

  LinkConfig cfg_;
  std::deque<Pending> waiting_;
  std::deque<Delivery> in_flight_;
  std::vector<std::pair<double, double>> outages_;
  double link_free_at_{0.0};
  std::uint64_t sent_{0};
  std::uint64_t dropped_{0};
  std::uint64_t delivered_{0};
  std::uint64_t bytes_delivered_{0};
};

}  // namespace rover
