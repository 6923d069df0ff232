#include "rover/telemetry/frame.hpp"

#include <zlib.h>

#include "rover/telemetry/bytes.hpp"

namespace rover {

const char* topic_name(Topic t) {
  switch (t) {
    case Topic::Trajectory: return "trajectory";
    case Topic::StereoCloud: return "stereo_cloud";
    case Topic::MapCloud: return "map_cloud";
    case Topic::CostMap2D: return "costmap";
    case Topic::ImageLeft: return "image_left";
    case Topic::LocalPlan: return "local_plan";
    case Topic::RoverPose: return "rover_pose";
    case Topic::GoalAck: return "goal_ack";
    case Topic::GlobalPlan: return "global_plan";
    case Topic::OperatorCommand: return "operator_command";
    case Topic::NavStatus: return "nav_status";
    case Topic::SessionEnd: return "session_end";
  }
  return "unknown";
}

const char* topic_label(Topic t) {
  switch (t) {
    case Topic::Trajectory: return "Trajectory";
    case Topic::StereoCloud: return "Stereo Camera Point Cloud";
    case Topic::MapCloud: return "Map Point Cloud";
    case Topic::CostMap2D: return "2D Cost Map";
    case Topic::ImageLeft: return "Image left (JPEG 80% @ 4 fps)";
    case Topic::LocalPlan: return "Local Plan";
    case Topic::RoverPose: return "Rover Pose";
    case Topic::GoalAck: return "Goal Ack";
    case Topic::GlobalPlan: return "Global Plan";
    case Topic::OperatorCommand: return "Operator Command";
    case Topic::NavStatus: return "Navigation Status";
    case Topic::SessionEnd: return "Session End";
  }
  return "Unknown";
}

std::optional<Topic> topic_from_id(std::uint8_t id) {
  if (id >= kTopicCount) return std::nullopt;
  return static_cast<Topic>(id);
}

bool is_droppable(Topic t) {
  return t == Topic::StereoCloud || t == Topic::MapCloud || t == Topic::CostMap2D || t == Topic::ImageLeft;
}

const char* to_string(FrameErrorKind k) {
  switch (k) {
    case FrameErrorKind::BadMagic: return "bad-magic";
    case FrameErrorKind::CrcMismatch: return "crc-mismatch";
    case FrameErrorKind::Truncated: return "truncated";
    case FrameErrorKind::UnknownTopic: return "unknown-topic";
    case FrameErrorKind::TooLarge: return "too-large";
  }
  return "?";
}

namespace {

std::uint32_t crc_of(std::span<const std::uint8_t> b) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, b.data(), static_cast<uInt>(b.size()));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void append_frame(std::vector<std::uint8_t>& out, const TelemetryFrame& frame) {
  if (frame.payload.size() > kMaxPayload) {
    throw FrameError(FrameErrorKind::TooLarge, "payload exceeds 64 MiB");
  }
  const std::size_t begin = out.size();
  out.reserve(begin + frame.wire_size());
  ByteWriter w(out);
  w.u32(kFrameMagic);
  w.u8(static_cast<std::uint8_t>(frame.topic));
  w.u32(frame.seq);
  w.f64(frame.stamp);
  w.u32(static_cast<std::uint32_t>(frame.payload.size()));
  w.bytes(frame.payload);
  w.u32(crc_of(std::span(out).subspan(begin)));
}

std::vector<std::uint8_t> encode_frame(const TelemetryFrame& frame) {
  std::vector<std::uint8_t> out;
  append_frame(out, frame);
  return out;
}

TelemetryFrame decode_frame(std::span<const std::uint8_t> bytes, std::size_t* consumed) {
  ByteReader r(bytes);
  try {
    if (r.u32() != kFrameMagic) {
      throw FrameError(FrameErrorKind::BadMagic, "frame magic mismatch");
    }
    const std::uint8_t topic_id = r.u8();
    TelemetryFrame f;
    f.seq = r.u32();
    f.stamp = r.f64();
    const std::uint32_t len = r.u32();
    if (len > kMaxPayload) {
      throw FrameError(FrameErrorKind::TooLarge, "declared payload exceeds 64 MiB");
    }
    const auto payload = r.bytes(len);
    const std::size_t covered = r.position();
    const std::uint32_t crc = r.u32();
    if (crc != crc_of(bytes.first(covered))) {
      throw FrameError(FrameErrorKind::CrcMismatch, "frame CRC mismatch");
    }
    const auto topic = topic_from_id(topic_id);
    if (!topic) {
      throw FrameError(FrameErrorKind::UnknownTopic, "unknown topic id " + std::to_string(topic_id));
    }
    f.topic = *topic;
    f.payload.assign(payload.begin(), payload.end());
    if (consumed != nullptr) *consumed = r.position();
    return f;
  } catch (const TruncatedInput&) {
    throw FrameError(FrameErrorKind::Truncated, "truncated frame");
  }
}

TelemetryFrame FrameSequencer::make(Topic topic, double stamp, std::vector<std::uint8_t> payload) {
  TelemetryFrame f;
  f.topic = topic;
  f.seq = next_[static_cast<std::size_t>(topic)]++;
  f.stamp = stamp;
  f.payload = std::move(payload);
  return f;
}

}  // namespace rover
