/**
 * @file replay.hpp
 * @brief Synthetic topic streams at prescribed rates.
 */
#pragma once

#include <vector>

#include "rover/telemetry/frame.hpp"
#include "rover/telemetry/stats.hpp"

namespace rover {

struct StreamSpec {
  Topic topic;
  double mbps;  ///< target rate including frame overhead
  double hz;  ///< frames per second
};

/// Average downlink rates of the reference field test, one stream per
/// product: trajectory 0.01, stereo cloud 29.49, map cloud 6.86, costmap
/// 0.10 and left image 2.07 Mb/s.
std::vector<StreamSpec> reference_streams();

/// Payload size of frame k so that frames 0..k together carry exactly
/// round(mbps * 1e6 / 8 * (k + 1) / hz) bytes on the wire.
std::size_t synthetic_payload_size(const StreamSpec& spec, std::size_t k);

/// Encodes, decodes and accounts every frame of every stream over
/// [0, duration). Frame k of a stream is stamped k / hz.
TopicStats replay_streams(const std::vector<StreamSpec>& streams, double duration, double window);

}  // namespace rover
