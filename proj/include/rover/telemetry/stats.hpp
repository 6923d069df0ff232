/**
 * @file stats.hpp
 * @brief Per-topic bandwidth accounting and the budget report.
 */
#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "rover/telemetry/frame.hpp"

namespace rover {

/// Byte counters per topic plus a sliding window for rates. Rates are
/// megabits per second: 8 * bytes_in_window / window / 1e6, where the window
/// covers stamps in (now - window, now].
class TopicStats {
 public:
  explicit TopicStats(double window = 1.0);

  void add(Topic topic, std::size_t wire_bytes, double stamp);

  double window() const { return window_; }
  std::uint64_t bytes_total(Topic t) const { return totals_[index(t)].bytes; }
  std::uint64_t frames_total(Topic t) const { return totals_[index(t)].frames; }
  std::uint64_t link_bytes() const { return link_bytes_; }
  std::uint64_t bytes_in_window(Topic t, double now) const;
  double rate_mbps(Topic t, double now) const;

 private:
  static std::size_t index(Topic t) { return static_cast<std::size_t>(t); }

  struct Sample {
    double stamp;
    std::uint64_t bytes;
  };
  struct Totals {
    std::uint64_t bytes{0};
    std::uint64_t frames{0};
  };

  double window_;
  std::array<std::deque<Sample>, kTopicCount> samples_{};
  std::array<Totals, kTopicCount> totals_{};
  std::uint64_t link_bytes_{0};
};

/// Adds the frame's full wire size to its topic.
void account(TopicStats& stats, const TelemetryFrame& frame, double stamp);

struct BudgetRow {
  Topic topic;
  std::string label;
  double mbps{0.0};
  std::uint64_t window_bytes{0};
  std::uint64_t bytes_total{0};
  std::uint64_t frames_total{0};
};

struct BudgetReport {
  double window{0.0};
  double stamp{0.0};
  std::vector<BudgetRow> rows;
  double total_mbps{0.0};  ///< sum of the row rates, in row order
  std::uint64_t total_window_bytes{0};
  std::uint64_t total_bytes{0};

  std::string to_text() const;
  std::string to_csv() const;
  std::string to_json() const;
};

/// Rows for the five downlink products always, then any other topic that
/// carried traffic.
BudgetReport budget_report(const TopicStats& stats, double now);

}  // namespace rover
