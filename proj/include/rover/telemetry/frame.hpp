/**
 * @file frame.hpp
 * @brief Telemetry topics and the framed wire format.
 *
 * Layout, little-endian:
 *   [magic u32][topic u8][seq u32][stamp f64][len u32][payload][crc32 u32]
 * The CRC covers everything before it.
 */
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rover {

enum class Topic : std::uint8_t {
  Trajectory = 0,
  StereoCloud = 1,
  MapCloud = 2,
  CostMap2D = 3,
  ImageLeft = 4,
  LocalPlan = 5,
  RoverPose = 6,
  GoalAck = 7,
  GlobalPlan = 8,
  OperatorCommand = 9,
  NavStatus = 10,
  SessionEnd = 11,
};

inline constexpr std::size_t kTopicCount = 12;

const char* topic_name(Topic t);
/// Human-readable label used in the bandwidth report.
const char* topic_label(Topic t);
std::optional<Topic> topic_from_id(std::uint8_t id);

/// Map and image products whose stale frames may be superseded on a
/// congested link. Commands and acknowledgements never are.
bool is_droppable(Topic t);

inline constexpr std::uint32_t kFrameMagic = 0x4C545652;  // "RVTL"
inline constexpr std::size_t kFrameOverhead = 4 + 1 + 4 + 8 + 4 + 4;
inline constexpr std::size_t kMaxPayload = 64u << 20;

struct TelemetryFrame {
  Topic topic{Topic::RoverPose};
  std::uint32_t seq{0};
  double stamp{0.0};
  std::vector<std::uint8_t> payload;

  std::size_t wire_size() const { return kFrameOverhead + payload.size(); }
  bool operator==(const TelemetryFrame&) const = default;
};

enum class FrameErrorKind { BadMagic, CrcMismatch, Truncated, UnknownTopic, TooLarge };

const char* to_string(FrameErrorKind k);

class FrameError : public std::runtime_error {
 public:
  FrameError(FrameErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  FrameErrorKind kind() const { return kind_; }

 private:
  FrameErrorKind kind_;
};

std::vector<std::uint8_t> encode_frame(const TelemetryFrame& frame);
void append_frame(std::vector<std::uint8_t>& out, const TelemetryFrame& frame);

/// Decodes one frame from the front of `bytes`; `consumed` receives its
/// length. Throws FrameError.
TelemetryFrame decode_frame(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr);

/// Assigns strictly increasing per-topic sequence numbers.
class FrameSequencer {
 public:
  TelemetryFrame make(Topic topic, double stamp, std::vector<std::uint8_t> payload);

 private:
  std::array<std::uint32_t, kTopicCount> next_{};
};

}  // namespace rover
