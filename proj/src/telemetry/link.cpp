#include "rover/telemetry/link.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rover {

void LinkConfig::validate() const {
  if (!(one_way_delay >= 0.0) || !std::isfinite(one_way_delay)) {
    throw std::invalid_argument("link delay must be a non-negative number of seconds");
  }
  if (bandwidth_cap && !(*bandwidth_cap > 0.0)) {
    throw std::invalid_argument("link bandwidth cap must be positive");
  }
}

double parse_latency(const std::string& text) {
  std::string s = text;
  double scale = 1.0;
  auto ends_with = [&](const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with("ms")) {
    scale = 1e-3;
    s.resize(s.size() - 2);
  } else if (ends_with("s")) {
    s.resize(s.size() - 1);
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid latency '" + text + "'");
  }
  if (used != s.size() || !(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument("invalid latency '" + text + "'");
  }
  return v * scale;
}

LinkChannel::LinkChannel(LinkConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void LinkChannel::add_outage(double from, double to) {
  if (!(to > from)) throw std::invalid_argument("outage must have positive length");
  outages_.emplace_back(from, to);
  std::sort(outages_.begin(), outages_.end());
}

bool LinkChannel::is_up(double t) const {
  return std::none_of(outages_.begin(), outages_.end(),
                      [t](const auto& o) { return t >= o.first && t < o.second; });
}

double LinkChannel::next_up(double t) const {
  // outages are sorted; chained windows push the start further out
  for (const auto& [from, to] : outages_) {
    if (t >= from && t < to) t = to;
  }
  return t;
}

void LinkChannel::advance(double now) {
  while (!waiting_.empty()) {
    const Pending& p = waiting_.front();
    double start = next_up(std::max(p.sent, cfg_.bandwidth_cap ? link_free_at_ : p.sent));
    if (start > now) break;
    double finish = start;
    if (cfg_.bandwidth_cap) {
      finish = start + 8.0 * static_cast<double>(p.frame.wire_size()) / (*cfg_.bandwidth_cap * 1e6);
      link_free_at_ = finish;
    }
    in_flight_.push_back({std::move(waiting_.front().frame), p.sent, finish + cfg_.one_way_delay});
    waiting_.pop_front();
  }
}

void LinkChannel::send(TelemetryFrame frame, double now) {
  advance(now);
  ++sent_;
  if (cfg_.drop_policy == DropPolicy::DropOldestPerTopic && is_droppable(frame.topic)) {
    const auto stale = std::find_if(waiting_.begin(), waiting_.end(),
                                    [&](const Pending& p) { return p.frame.topic == frame.topic; });
    if (stale != waiting_.end()) {
      waiting_.erase(stale);
      ++dropped_;
    }
  }
  waiting_.push_back({std::move(frame), now});
  advance(now);
}

std::vector<Delivery> LinkChannel::poll(double now) {
  advance(now);
  std::vector<Delivery> out;
  // Delivery times are non-decreasing in start order for a fixed delay.
  while (!in_flight_.empty() && in_flight_.front().delivered <= now) {
    bytes_delivered_ += in_flight_.front().frame.wire_size();
    ++delivered_;
    out.push_back(std::move(in_flight_.front()));
    in_flight_.pop_front();
  }
  return out;
}

}  // namespace rover
