#include "rover/telemetry/replay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rover {

std::vector<StreamSpec> reference_streams() {
  return {{Topic::Trajectory, 0.01, 1.0},
          {Topic::StereoCloud, 29.49, 4.0},
          {Topic::MapCloud, 6.86, 1.0},
          {Topic::CostMap2D, 0.10, 4.0},
          {Topic::ImageLeft, 2.07, 4.0}};
}

std::size_t synthetic_payload_size(const StreamSpec& spec, std::size_t k) {
  const double bytes_per_second = spec.mbps * 1e6 / 8.0;
  auto cumulative = [&](std::size_t n) {
    return static_cast<long long>(std::llround(bytes_per_second * static_cast<double>(n) / spec.hz));
  };
  const long long wire = cumulative(k + 1) - cumulative(k);
  if (wire < static_cast<long long>(kFrameOverhead)) {
    throw std::invalid_argument("stream rate too low for its frame overhead");
  }
  return static_cast<std::size_t>(wire) - kFrameOverhead;
}

TopicStats replay_streams(const std::vector<StreamSpec>& streams, double duration, double window) {
  struct Event {
    double stamp;
    std::size_t stream;
    std::size_t k;
  };
  std::vector<Event> events;
  for (std::size_t s = 0; s < streams.size(); ++s) {
    for (std::size_t k = 0;; ++k) {
      const double t = static_cast<double>(k) / streams[s].hz;
      if (t >= duration) break;
      events.push_back({t, s, k});
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.stamp < b.stamp; });

  TopicStats stats(window);
  FrameSequencer seq;
  for (const auto& e : events) {
    const auto& spec = streams[e.stream];
    std::vector<std::uint8_t> payload(synthetic_payload_size(spec, e.k));
    for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<std::uint8_t>(i * 31 + e.k);
    const auto wire = encode_frame(seq.make(spec.topic, e.stamp, std::move(payload)));
    account(stats, decode_frame(wire), e.stamp);
  }
  return stats;
}

}  // namespace rover
