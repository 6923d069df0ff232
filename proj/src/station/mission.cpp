#include "rover/station/mission.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace rover {

namespace {

std::string where(const std::string& origin, const YAML::Node& node) {
  const auto m = node.Mark();
  if (m.line < 0) return origin;
  return origin + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

template <typename T>
T get(const YAML::Node& node, const char* key, const std::string& origin, const std::string& ctx) {
  const YAML::Node v = node[key];
  if (!v) throw MissionError(where(origin, node) + ": " + ctx + ": missing field '" + key + "'");
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw MissionError(where(origin, v) + ": " + ctx + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T get_or(const YAML::Node& node, const char* key, T fallback, const std::string& origin, const std::string& ctx) {
  return node[key] ? get<T>(node, key, origin, ctx) : fallback;
}

double latency_value(const YAML::Node& v, const std::string& origin) {
  try {
    return parse_latency(v.as<std::string>());
  } catch (const std::exception& e) {
    throw MissionError(where(origin, v) + ": latency: " + e.what());
  }
}

double positive(double v, const YAML::Node& node, const std::string& origin, const std::string& ctx) {
  if (!(v > 0.0) || !std::isfinite(v)) throw MissionError(where(origin, node) + ": " + ctx + ": must be positive");
  return v;
}

MissionStep parse_step(const YAML::Node& node, const std::string& origin, const std::string& ctx) {
  if (node.IsScalar()) {
    const auto s = node.as<std::string>();
    if (s == "cancel") return CancelStep{};
    if (s == "estop") return EStopStep{};
    throw MissionError(where(origin, node) + ": " + ctx + ": unknown step '" + s + "'");
  }
  if (!node.IsMap() || node.size() != 1) {
    throw MissionError(where(origin, node) + ": " + ctx + ": a step is a single-key mapping");
  }
  const auto key = node.begin()->first.as<std::string>();
  const YAML::Node body = node.begin()->second;
  if (key == "goal") {
    GoalStep g;
    g.goal.id = get<std::string>(body, "id", origin, ctx);
    g.goal.x = get<double>(body, "x", origin, ctx);
    g.goal.y = get<double>(body, "y", origin, ctx);
    g.goal.theta = get<double>(body, "theta", origin, ctx);
    g.timeout = positive(get_or<double>(body, "timeout", 300.0, origin, ctx), body, origin, ctx);
    return g;
  }
  if (key == "teleop") {
    return TeleopStep{get<double>(body, "fwd", origin, ctx), get<double>(body, "rot", origin, ctx),
                      positive(get<double>(body, "duration", origin, ctx), body, origin, ctx)};
  }
  if (key == "wait" || key == "link_down") {
    const double d = positive(body.IsMap() ? get<double>(body, "duration", origin, ctx) : body.as<double>(), body,
                              origin, ctx);
    if (key == "wait") return WaitStep{d};
    return LinkDownStep{d};
  }
  throw MissionError(where(origin, node) + ": " + ctx + ": unknown step '" + key + "'");
}

MissionAssertion parse_assertion(const YAML::Node& node, const std::string& origin, const std::string& ctx) {
  std::string key;
  YAML::Node body;
  if (node.IsScalar()) {
    key = node.as<std::string>();
  } else if (node.IsMap() && node.size() == 1) {
    key = node.begin()->first.as<std::string>();
    body = node.begin()->second;
  } else {
    throw MissionError(where(origin, node) + ": " + ctx + ": an assertion is a name or a single-key mapping");
  }
  const bool has_body = body && !body.IsNull();
  MissionAssertion a;
  auto goal_id = [&] { return has_body && body.IsScalar() ? body.as<std::string>() : std::string{}; };
  if (key == "goal_reached") {
    a.kind = AssertionKind::GoalReached;
    a.goal_id = goal_id();
  } else if (key == "no_path") {
    a.kind = AssertionKind::NoPath;
    a.goal_id = goal_id();
  } else if (key == "goal_acked") {
    a.kind = AssertionKind::GoalAcked;
  } else if (key == "no_violations") {
    a.kind = AssertionKind::NoViolations;
  } else if (key == "no_deadman_trips") {
    a.kind = AssertionKind::NoDeadmanTrips;
  } else if (key == "never_moved") {
    a.kind = AssertionKind::NeverMoved;
    a.tolerance = has_body ? body.as<double>() : 1e-6;
  } else if (key == "final_heading") {
    a.kind = AssertionKind::FinalHeading;
    a.theta = get<double>(body, "theta", origin, ctx);
    a.tolerance = get<double>(body, "tolerance", origin, ctx);
  } else if (key == "final_position") {
    a.kind = AssertionKind::FinalPosition;
    a.x = get<double>(body, "x", origin, ctx);
    a.y = get<double>(body, "y", origin, ctx);
    a.tolerance = get<double>(body, "tolerance", origin, ctx);
  } else if (key == "return_to_start") {
    a.kind = AssertionKind::ReturnToStart;
    a.tolerance = has_body ? body.as<double>() : 0.3;
  } else if (key == "bandwidth_below") {
    a.kind = AssertionKind::BandwidthBelow;
    a.mbps = body.as<double>();
  } else {
    throw MissionError(where(origin, node) + ": " + ctx + ": unknown assertion '" + key + "'");
  }
  return a;
}

}  // namespace

std::string assertion_name(const MissionAssertion& a) {
  auto with_id = [&](const char* base) { return a.goal_id.empty() ? std::string(base) : std::string(base) + ":" + a.goal_id; };
  switch (a.kind) {
    case AssertionKind::GoalReached: return with_id("goal_reached");
    case AssertionKind::NoPath: return with_id("no_path");
    case AssertionKind::FinalHeading: return "final_heading";
    case AssertionKind::FinalPosition: return "final_position";
    case AssertionKind::ReturnToStart: return "return_to_start";
    case AssertionKind::NoViolations: return "no_violations";
    case AssertionKind::NeverMoved: return "never_moved";
    case AssertionKind::GoalAcked: return "goal_acked";
    case AssertionKind::NoDeadmanTrips: return "no_deadman_trips";
    case AssertionKind::BandwidthBelow: return "bandwidth_below";
  }
  return "?";
}

MissionScript parse_mission(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw MissionError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw MissionError(origin + ": mission document must be a mapping");
  MissionScript m;
  m.name = get<std::string>(root, "name", origin, "mission");
  if (root["latency"]) m.latency = latency_value(root["latency"], origin);
  if (root["bandwidth_cap"]) {
    m.bandwidth_cap = positive(get<double>(root, "bandwidth_cap", origin, "mission"), root, origin, "bandwidth_cap");
  }
  if (const YAML::Node tel = root["telemetry"]) {
    if (tel["image"]) m.image = get<bool>(tel, "image", origin, "telemetry");
    if (tel["camera"]) {
      const auto wh = get<std::vector<int>>(tel, "camera", origin, "telemetry");
      if (wh.size() != 2 || wh[0] < 8 || wh[1] < 8) {
        throw MissionError(where(origin, tel["camera"]) + ": telemetry: camera must be [width, height]");
      }
      m.camera_width = wh[0];
      m.camera_height = wh[1];
    }
  }
  const YAML::Node steps = root["steps"];
  if (!steps || !steps.IsSequence()) throw MissionError(where(origin, root) + ": mission: 'steps' must be a list");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    m.steps.push_back(parse_step(steps[i], origin, "step[" + std::to_string(i) + "]"));
  }
  if (const YAML::Node as = root["assertions"]) {
    if (!as.IsSequence()) throw MissionError(where(origin, as) + ": mission: 'assertions' must be a list");
    for (std::size_t i = 0; i < as.size(); ++i) {
      m.assertions.push_back(parse_assertion(as[i], origin, "assertion[" + std::to_string(i) + "]"));
    }
  }
  std::vector<std::string> ids;
  for (const auto& s : m.steps) {
    if (const auto* g = std::get_if<GoalStep>(&s)) {
      if (std::find(ids.begin(), ids.end(), g->goal.id) != ids.end()) {
        throw MissionError(origin + ": duplicate goal id '" + g->goal.id + "'");
      }
      ids.push_back(g->goal.id);
    }
  }
  return m;
}

MissionScript load_mission(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissionError("cannot open mission script " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_mission(buffer.str(), path.string());
}

SessionConfig mission_config(const MissionScript& script, const MissionOptions& options) {
  SessionConfig cfg = options.base;
  if (script.latency) cfg.link.one_way_delay = *script.latency;
  if (options.latency) cfg.link.one_way_delay = *options.latency;
  if (script.bandwidth_cap) cfg.link.bandwidth_cap = script.bandwidth_cap;
  if (script.image) cfg.onboard.telemetry.image = *script.image;
  if (script.camera_width) {
    cfg.onboard.camera.width = *script.camera_width;
    cfg.onboard.camera.height = *script.camera_height;
  }
  return cfg;
}

namespace {

class MissionRun {
 public:
  MissionRun(const WorldScene& scene, SessionConfig cfg, const SessionHooks& hooks)
      : session_(scene, cfg),
        truth_(inflate(rasterize_scene(scene, session_.onboard().grid().geometry()), cfg.onboard.inflation)),
        footprint_(cfg.onboard.nav.params.footprint) {
    session_.set_hooks(hooks);
    report_.start = session_.onboard().state();
    check();
  }

  Session& session() { return session_; }
  MissionReport& report() { return report_; }

  void advance() {
    session_.step();
    check();
  }

  void run_for(double duration) {
    const double end = session_.now() + duration;
    while (session_.now() < end - kTimeEpsilon) advance();
  }

 private:
  void check() {
    const auto& s = session_.onboard().state();
    if (is_pose_admissible(truth_, s.pose, footprint_) != Admissibility::Admissible) ++report_.violations;
    report_.max_displacement =
        std::max({report_.max_displacement, distance(s.pose.position(), report_.start.pose.position()),
                  std::abs(wrap_angle(s.pose.theta - report_.start.pose.theta))});
    const auto steps = session_.onboard().step_count();
    if (steps % 20 == 0) {
      const auto b = session_.ground().budget(session_.now());
      std::uint64_t bytes = 0;
      for (const auto& r : b.rows) bytes += r.bytes_total;
      if (bytes != session_.ground().stats().link_bytes() || b.total_bytes != bytes) report_.accounting_conserved = false;
      if (steps >= 20) report_.peak_total_mbps = std::max(report_.peak_total_mbps, b.total_mbps);
    }
  }

  Session session_;
  Costmap truth_;
  Footprint footprint_;
  MissionReport report_;
};

GoalOutcome run_goal(MissionRun& run, const GoalStep& step) {
  Session& s = run.session();
  GoalOutcome out{step.goal.id, "timeout", s.now(), s.now()};
  s.ingest(SetGoal{step.goal});
  const double deadline = s.now() + step.timeout;
  while (s.now() < deadline - kTimeEpsilon) {
    run.advance();
    const auto& st = s.ground().status();
    if (st.goal_id == step.goal.id && (st.nav_state == "reached" || st.nav_state == "no_path")) {
      out.outcome = st.nav_state;
      break;
    }
  }
  out.finished = s.now();
  return out;
}

void run_teleop(MissionRun& run, const TeleopStep& step) {
  Session& s = run.session();
  const double end = s.now() + step.duration;
  const double period = s.config().onboard.nav.control_period;
  double next = s.now();
  while (s.now() < end - kTimeEpsilon) {
    if (s.now() >= next - kTimeEpsilon) {
      s.ingest(JoystickTwist{step.fwd, step.rot});
      next += period;
    }
    run.advance();
  }
  s.ingest(JoystickTwist{0.0, 0.0});
}

AssertionResult evaluate(const MissionAssertion& a, const MissionReport& r, const Session& s) {
  AssertionResult res{assertion_name(a), false, ""};
  const Pose2D& p = r.final_state.pose;
  std::ostringstream d;
  switch (a.kind) {
    case AssertionKind::GoalReached:
    case AssertionKind::NoPath: {
      const char* want = a.kind == AssertionKind::GoalReached ? "reached" : "no_path";
      int matched = 0, considered = 0;
      for (const auto& g : r.goals) {
        if (!a.goal_id.empty() && g.id != a.goal_id) continue;
        ++considered;
        if (g.outcome == want) ++matched;
        d << g.id << "=" << g.outcome << " ";
      }
      res.passed = considered > 0 && matched == considered;
      if (considered == 0) d << "no matching goal";
      break;
    }
    case AssertionKind::FinalHeading: {
      const double err = std::abs(wrap_angle(p.theta - a.theta));
      res.passed = err < a.tolerance;
      d << "heading error " << err << " rad";
      break;
    }
    case AssertionKind::FinalPosition: {
      const double err = distance(p.position(), {a.x, a.y});
      res.passed = err < a.tolerance;
      d << "position error " << err << " m";
      break;
    }
    case AssertionKind::ReturnToStart: {
      const double err = distance(p.position(), r.start.pose.position());
      res.passed = err < a.tolerance;
      d << "distance to start " << err << " m";
      break;
    }
    case AssertionKind::NoViolations:
      res.passed = r.violations == 0;
      d << r.violations << " steps violating the footprint rule";
      break;
    case AssertionKind::NeverMoved:
      res.passed = r.max_displacement <= a.tolerance;
      d << "max displacement " << r.max_displacement;
      break;
    case AssertionKind::GoalAcked: {
      const auto& acks = s.ground().acks();
      res.passed = true;
      for (const auto& id : s.ground().goals_sent()) {
        const auto it = acks.find(id);
        const int n = it == acks.end() ? 0 : it->second;
        if (n != 1) res.passed = false;
        d << id << " acked " << n << "x ";
      }
      break;
    }
    case AssertionKind::NoDeadmanTrips:
      res.passed = r.deadman_trips == 0;
      d << r.deadman_trips << " trips";
      break;
    case AssertionKind::BandwidthBelow:
      res.passed = r.peak_total_mbps < a.mbps;
      d << "peak " << r.peak_total_mbps << " Mb/s";
      break;
  }
  res.detail = d.str();
  if (!res.detail.empty() && res.detail.back() == ' ') res.detail.pop_back();
  return res;
}

}  // namespace

MissionReport run_mission(const WorldScene& scene, const MissionScript& script, const MissionOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const SessionConfig cfg = mission_config(script, options);
  MissionRun run(scene, cfg, options.hooks);
  Session& s = run.session();
  auto& r = run.report();
  for (const auto& step : script.steps) {
    std::visit(
        [&](const auto& st) {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, GoalStep>) {
            r.goals.push_back(run_goal(run, st));
          } else if constexpr (std::is_same_v<T, TeleopStep>) {
            run_teleop(run, st);
          } else if constexpr (std::is_same_v<T, WaitStep>) {
            run.run_for(st.duration);
          } else if constexpr (std::is_same_v<T, LinkDownStep>) {
            s.add_outage(s.now(), s.now() + st.duration);
          } else if constexpr (std::is_same_v<T, CancelStep>) {
            s.ingest(CancelGoal{});
          } else {
            s.ingest(EmergencyStop{});
          }
        },
        step);
  }
  // let in-flight commands and telemetry settle
  run.run_for(2.0 * cfg.link.one_way_delay + cfg.onboard.sim_dt);

  if (options.on_finish) options.on_finish(s);
  r.mission = script.name;
  r.scene = scene.name;
  r.latency = cfg.link.one_way_delay;
  r.final_state = s.onboard().state();
  r.sim_time = s.now();
  r.deadman_trips = s.onboard().deadman_trips();
  r.commands_dropped = s.ground().commands_dropped();
  r.budget = s.ground().budget(s.now());
  r.passed = true;
  for (const auto& a : script.assertions) {
    r.assertions.push_back(evaluate(a, r, s));
    r.passed = r.passed && r.assertions.back().passed;
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string MissionReport::to_json() const {
  using nlohmann::json;
  auto state = [](const RoverState& s) {
    return json{{"time", s.time}, {"x", s.pose.x}, {"y", s.pose.y}, {"theta", s.pose.theta}, {"v", s.twist.v},
                {"omega", s.twist.omega}};
  };
  json j{{"mission", mission},
         {"scene", scene},
         {"latency", latency},
         {"passed", passed},
         {"start", state(start)},
         {"final", state(final_state)},
         {"sim_time", sim_time},
         {"wall_seconds", wall_seconds},
         {"violations", violations},
         {"max_displacement", max_displacement},
         {"deadman_trips", deadman_trips},
         {"peak_total_mbps", peak_total_mbps},
         {"accounting_conserved", accounting_conserved},
         {"commands_dropped", commands_dropped},
         {"budget", json::parse(budget.to_json())}};
  j["assertions"] = json::array();
  for (const auto& a : assertions) j["assertions"].push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  j["goals"] = json::array();
  for (const auto& g : goals) {
    j["goals"].push_back({{"id", g.id}, {"outcome", g.outcome}, {"started", g.started}, {"finished", g.finished}});
  }
  return j.dump(2);
}

}  // namespace rover
