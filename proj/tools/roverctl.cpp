// Command-line entry point: serve, mission and replay.
#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "rover/station/mission.hpp"
#include "rover/station/server.hpp"
#include "rover/station/session_log.hpp"
#include "rover/world/scene.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

int run_serve(const std::string& scene_path, const std::string& latency, rover::ServerConfig server,
              std::optional<double> cap, bool image) {
  rover::SessionConfig cfg;
  cfg.link.one_way_delay = rover::parse_latency(latency);
  cfg.link.bandwidth_cap = cap;
  cfg.onboard.telemetry.image = image;
  const auto scene = rover::load_scene(scene_path);
  cfg.seed = scene.seed;
  rover::StationServer station(scene, cfg, server);
  const auto port = station.start();
  std::cout << "serving scene '" << scene.name << "' on http://" << server.host << ":" << port
            << " (websocket /ws, health /health, one-way delay " << cfg.link.one_way_delay << " s)" << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  station.stop();
  std::cout << "stopped" << std::endl;
  return 0;
}

int run_mission(const std::string& scene_path, const std::string& script_path, const std::string& report_path,
                const std::string& latency, const std::string& log_path) {
  const auto scene = rover::load_scene(scene_path);
  const auto script = rover::load_mission(script_path);
  rover::MissionOptions opts;
  opts.base.seed = scene.seed;
  if (!latency.empty()) opts.latency = rover::parse_latency(latency);
  std::optional<rover::SessionRecorder> recorder;
  if (!log_path.empty()) {
    recorder.emplace(scene, rover::mission_config(script, opts));
    recorder->stream_to(log_path);
    opts.hooks = recorder->hooks();
    opts.on_finish = [&recorder](const rover::Session& s) { recorder->finish(s); };
  }
  const auto report = rover::run_mission(scene, script, opts);
  for (const auto& a : report.assertions) {
    std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << "  " << a.detail << "\n";
  }
  std::cout << (report.passed ? "MISSION PASSED" : "MISSION FAILED") << " (" << report.sim_time
            << " s simulated, " << report.wall_seconds << " s wall)\n";
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot write report " + report_path);
    out << report.to_json() << "\n";
  }
  return report.passed ? 0 : 1;
}

int run_replay(const std::string& log_path) {
  const auto log = rover::read_log(log_path);
  const auto r = rover::replay_log(log);
  if (r.empty) {
    std::cout << "empty log: nothing to replay\n";
    return 0;
  }
  std::cout << "replayed " << r.duration << " s, " << r.commands << " commands, " << r.frames_compared
            << " frames compared, " << r.mismatches << " mismatches\n";
  if (!r.first_mismatch.empty()) std::cout << "first mismatch: " << r.first_mismatch << "\n";
  const auto& a = r.recorded_final->pose;
  const auto& b = r.replayed_final->pose;
  std::cout.precision(17);
  std::cout << "final pose recorded (" << a.x << ", " << a.y << ", " << a.theta << ") replayed (" << b.x << ", "
            << b.y << ", " << b.theta << ")\n";
  std::cout << (r.identical() ? "REPLAY IDENTICAL" : "REPLAY DIVERGED") << "\n";
  return r.identical() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rover teleoperation ground station"};
  app.require_subcommand(1);

  auto* serve = app.add_subcommand("serve", "Run the live ground station");
  std::string serve_scene, serve_latency = "0", serve_log;
  rover::ServerConfig server;
  std::optional<double> cap;
  bool no_image = false;
  serve->add_option("--scene", serve_scene, "Scene file")->required()->check(CLI::ExistingFile);
  serve->add_option("--latency", serve_latency, "One-way link delay: 0, 410ms or seconds");
  serve->add_option("--port", server.port, "TCP port (0 picks a free one)");
  serve->add_option("--host", server.host, "Listen address");
  serve->add_option("--static", server.static_root, "Directory with the console assets");
  serve->add_option("--speed", server.speed, "Simulated seconds per wall second (<= 0: unthrottled)");
  serve->add_option("--bandwidth-cap", cap, "Link capacity [Mb/s]");
  serve->add_option("--log", serve_log, "Record the session to this file");
  serve->add_flag("--no-image", no_image, "Do not stream the camera");

  auto* mission = app.add_subcommand("mission", "Run a scripted mission headless");
  std::string scene_path, script_path, report_path, latency, mission_log;
  mission->add_option("--scene", scene_path, "Scene file")->required()->check(CLI::ExistingFile);
  mission->add_option("--script", script_path, "Mission script")->required()->check(CLI::ExistingFile);
  mission->add_option("--report", report_path, "Report output (JSON)");
  mission->add_option("--latency", latency, "One-way link delay: 0, 410ms or seconds (overrides the script)");
  mission->add_option("--log", mission_log, "Record the session to this file");

  auto* replay = app.add_subcommand("replay", "Replay a recorded session and verify it");
  std::string replay_log;
  replay->add_option("--log", replay_log, "Session log")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      if (!serve_log.empty()) server.log_path = serve_log;
      return run_serve(serve_scene, serve_latency, server, cap, !no_image);
    }
    if (*mission) return run_mission(scene_path, script_path, report_path, latency, mission_log);
    if (*replay) return run_replay(replay_log);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
