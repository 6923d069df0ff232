/**
 * @file session_log.hpp
 * @brief Append-only session recording and deterministic replay.
 *
 * File layout: the text line "ROVERLOG 1", one JSON header line, then
 * telemetry frames back to back. OperatorCommand records hold operator
 * commands and link outages as JSON, stamped when they entered the ground
 * station; downlink records are frames as the ground received them; a final
 * SessionEnd record carries the rover state at the end of the session.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rover/station/session.hpp"

namespace rover {

inline constexpr const char* kLogFormat = "ROVERLOG 1";
inline constexpr const char* kBuildVersion = "rover-station 1.0";

class LogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LogHeader {
  std::string build{kBuildVersion};
  std::string scene_yaml;
  std::string config_json;  ///< canonical config_to_json text
  std::uint64_t config_hash{0};
  std::uint64_t seed{0};
  std::vector<Topic> topics;  ///< downlink topics recorded
};

/// FNV-1a over the build version and the canonical config text.
std::uint64_t config_hash(const std::string& config_json, const std::string& build = kBuildVersion);

struct SessionLog {
  LogHeader header;
  std::vector<TelemetryFrame> records;
};

/// Downlink topics recorded by default: everything except the bulky camera
/// and point-cloud products.
std::vector<Topic> default_log_topics();

std::vector<std::uint8_t> serialize_log(const SessionLog& log);
std::vector<std::uint8_t> serialize_header(const LogHeader& header);
/// Parses and validates. Throws LogError or FrameError.
SessionLog parse_log(std::span<const std::uint8_t> bytes);
SessionLog read_log(const std::filesystem::path& path);
void write_log(const std::filesystem::path& path, const SessionLog& log);

/// Per topic: stamps non-decreasing and seq strictly increasing; SessionEnd
/// at most once and last; config hash matches this build. Throws LogError.
void validate_log(const SessionLog& log);

/// Collects a session's records through its hooks, optionally streaming
/// them to a file as they happen.
class SessionRecorder {
 public:
  SessionRecorder(const WorldScene& scene, const SessionConfig& cfg, std::vector<Topic> topics = default_log_topics());

  /// Starts the append-only file; records already collected are written.
  void stream_to(const std::filesystem::path& path);
  SessionHooks hooks();
  /// Appends the SessionEnd record.
  void finish(const Session& session);

  const SessionLog& log() const { return log_; }

 private:
  void append(TelemetryFrame frame);

  SessionLog log_;
  FrameSequencer seq_;
  std::optional<std::ofstream> out_;
};

struct ReplayResult {
  bool empty{false};
  std::size_t commands{0};
  std::size_t frames_compared{0};
  std::size_t mismatches{0};
  std::string first_mismatch;
  std::optional<RoverState> recorded_final;
  std::optional<RoverState> replayed_final;
  double duration{0.0};

  bool final_pose_identical() const;
  bool identical() const { return mismatches == 0 && (empty || final_pose_identical()); }
};

/// Re-runs the session from the header and the recorded commands and
/// compares every recorded downlink frame and the final state bit for bit.
ReplayResult replay_log(const SessionLog& log);

}  // namespace rover
