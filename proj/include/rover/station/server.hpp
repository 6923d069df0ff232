/**
 * @file server.hpp
 * @brief Live ground-station service: WebSocket bridge to the operator
 * console, health endpoint and static files, with the session stepped in
 * (optionally accelerated) real time.
 *
 * WebSocket protocol on "/ws":
 *  - binary server messages: [len u32][telemetry frame], little-endian;
 *  - text server messages: JSON with "type" hello | stats | notice |
 *    goal_echo;
 *  - text client messages: operator commands as JSON, plus
 *    {"type": "echo_goal", "x", "y", "theta"} which is answered with the
 *    goal as the server parsed it.
 * The first connection is the operator; later ones are read-only observers.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "rover/station/session.hpp"

namespace rover {

struct ServerConfig {
  std::string host{"127.0.0.1"};
  std::uint16_t port{8080};  ///< 0 picks a free port
  std::filesystem::path static_root{"web"};
  double speed{1.0};  ///< simulated seconds per wall second; <= 0 runs flat out
  std::optional<std::filesystem::path> log_path;
};

/// Length-prefixed envelope carrying one encoded frame.
std::vector<std::uint8_t> wrap_frame(const TelemetryFrame& frame);
/// Inverse of wrap_frame. Throws FrameError on a bad envelope.
TelemetryFrame unwrap_frame(std::span<const std::uint8_t> message);

class StationServer {
 public:
  StationServer(WorldScene scene, SessionConfig session, ServerConfig cfg);
  ~StationServer();
  StationServer(const StationServer&) = delete;
  StationServer& operator=(const StationServer&) = delete;

  /// Binds, starts the network and simulation threads and returns the port.
  std::uint16_t start();
  /// Stops both threads and closes the session log. Idempotent.
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

  std::string health_json() const;

  struct Impl;  ///< network and simulation state, defined in server.cpp

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace rover
