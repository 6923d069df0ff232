#include "rover/telemetry/stats.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rover {

TopicStats::TopicStats(double window) : window_(window) {
  if (!(window > 0.0)) throw std::invalid_argument("stats window must be positive");
}

void TopicStats::add(Topic topic, std::size_t wire_bytes, double stamp) {
  auto& q = samples_[index(topic)];
  q.push_back({stamp, wire_bytes});
  // samples older than the window can never count again once time moves on
  while (!q.empty() && q.front().stamp <= stamp - window_) q.pop_front();
  totals_[index(topic)].bytes += wire_bytes;
  totals_[index(topic)].frames += 1;
  link_bytes_ += wire_bytes;
}

std::uint64_t TopicStats::bytes_in_window(Topic t, double now) const {
  std::uint64_t sum = 0;
  for (const auto& s : samples_[index(t)]) {
    if (s.stamp > now - window_ && s.stamp <= now) sum += s.bytes;
  }
  return sum;
}

double TopicStats::rate_mbps(Topic t, double now) const {
  return 8.0 * static_cast<double>(bytes_in_window(t, now)) / window_ / 1e6;
}

void account(TopicStats& stats, const TelemetryFrame& frame, double stamp) {
  stats.add(frame.topic, frame.wire_size(), stamp);
}

BudgetReport budget_report(const TopicStats& stats, double now) {
  BudgetReport r;
  r.window = stats.window();
  r.stamp = now;
  const Topic table[] = {Topic::Trajectory, Topic::StereoCloud, Topic::MapCloud, Topic::CostMap2D, Topic::ImageLeft};
  auto add_row = [&](Topic t) {
    BudgetRow row{t, topic_label(t), stats.rate_mbps(t, now), stats.bytes_in_window(t, now), stats.bytes_total(t),
                  stats.frames_total(t)};
    r.total_mbps += row.mbps;
    r.total_window_bytes += row.window_bytes;
    r.total_bytes += row.bytes_total;
    r.rows.push_back(std::move(row));
  };
  for (Topic t : table) add_row(t);
  for (std::size_t i = 0; i < kTopicCount; ++i) {
    const auto t = static_cast<Topic>(i);
    bool listed = false;
    for (Topic u : table) listed |= u == t;
    if (!listed && stats.frames_total(t) > 0) add_row(t);
  }
  return r;
}

std::string BudgetReport::to_text() const {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-32s %12s\n", "Topic", "Data Size (Mb/s)");
  os << line;
  for (const auto& row : rows) {
    std::snprintf(line, sizeof line, "%-32s %12.2f\n", row.label.c_str(), row.mbps);
    os << line;
  }
  std::snprintf(line, sizeof line, "%-32s %12.2f\n", "TOTAL", total_mbps);
  os << line;
  return os.str();
}

std::string BudgetReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "topic,label,mbps,window_bytes,bytes_total,frames_total\n";
  for (const auto& row : rows) {
    os << topic_name(row.topic) << ",\"" << row.label << "\"," << row.mbps << ',' << row.window_bytes << ','
       << row.bytes_total << ',' << row.frames_total << '\n';
  }
  os << "total,\"TOTAL\"," << total_mbps << ',' << total_window_bytes << ',' << total_bytes << ",\n";
  return os.str();
}

std::string BudgetReport::to_json() const {
  nlohmann::json j;
  j["window"] = window;
  j["stamp"] = stamp;
  j["total_mbps"] = total_mbps;
  j["total_window_bytes"] = total_window_bytes;
  j["total_bytes"] = total_bytes;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : rows) {
    j["rows"].push_back({{"topic", topic_name(row.topic)},
                         {"label", row.label},
                         {"mbps", row.mbps},
                         {"window_bytes", row.window_bytes},
                         {"bytes_total", row.bytes_total},
                         {"frames_total", row.frames_total}});
  }
  return j.dump();
}

}  // namespace rover
