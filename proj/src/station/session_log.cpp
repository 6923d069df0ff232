#include "rover/station/session_log.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <iterator>

#include "json.hpp"
#include "rover/telemetry/payloads.hpp"

namespace rover {

using nlohmann::json;

std::uint64_t config_hash(const std::string& config_json, const std::string& build) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  mix(build);
  mix("\n");
  mix(config_json);
  return h;
}

std::vector<Topic> default_log_topics() {
  return {Topic::Trajectory, Topic::CostMap2D, Topic::LocalPlan, Topic::RoverPose,
          Topic::GoalAck,    Topic::GlobalPlan, Topic::NavStatus};
}

namespace {

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string outage_json(double from, double to) {
  return json{{"type", "link_outage"}, {"from", from}, {"to", to}}.dump();
}

}  // namespace

std::vector<std::uint8_t> serialize_header(const LogHeader& h) {
  json topics = json::array();
  for (Topic t : h.topics) topics.push_back(topic_name(t));
  const json doc{{"build", h.build},
                 {"scene", h.scene_yaml},
                 {"config", json::parse(h.config_json)},
                 {"config_hash", hex(h.config_hash)},
                 {"seed", h.seed},
                 {"topics", topics}};
  const std::string text = std::string(kLogFormat) + "\n" + doc.dump() + "\n";
  return {text.begin(), text.end()};
}

std::vector<std::uint8_t> serialize_log(const SessionLog& log) {
  auto out = serialize_header(log.header);
  for (const auto& r : log.records) append_frame(out, r);
  return out;
}

SessionLog parse_log(std::span<const std::uint8_t> bytes) {
  auto line_end = [&](std::size_t from) {
    const auto it = std::find(bytes.begin() + static_cast<std::ptrdiff_t>(from), bytes.end(), '\n');
    if (it == bytes.end()) throw LogError("session log: truncated header");
    return static_cast<std::size_t>(it - bytes.begin());
  };
  const std::size_t first = line_end(0);
  if (std::string(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(first)) != kLogFormat) {
    throw LogError("session log: not a session log (bad format line)");
  }
  const std::size_t second = line_end(first + 1);
  SessionLog log;
  try {
    const auto doc = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(first + 1),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(second));
    auto& h = log.header;
    h.build = doc.at("build").get<std::string>();
    h.scene_yaml = doc.at("scene").get<std::string>();
    h.config_json = doc.at("config").dump();
    h.config_hash = std::stoull(doc.at("config_hash").get<std::string>(), nullptr, 16);
    h.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& t : doc.at("topics")) {
      const auto name = t.get<std::string>();
      bool found = false;
      for (int i = 0; i < static_cast<int>(kTopicCount); ++i) {
        if (topic_name(static_cast<Topic>(i)) == name) {
          h.topics.push_back(static_cast<Topic>(i));
          found = true;
        }
      }
      if (!found) throw LogError("session log: unknown topic '" + name + "' in header");
    }
  } catch (const json::exception& e) {
    throw LogError(std::string("session log: malformed header: ") + e.what());
  }
  std::size_t pos = second + 1;
  while (pos < bytes.size()) {
    std::size_t used = 0;
    log.records.push_back(decode_frame(bytes.subspan(pos), &used));
    pos += used;
  }
  validate_log(log);
  return log;
}

SessionLog read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LogError("cannot open session log " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_log(bytes);
}

void write_log(const std::filesystem::path& path, const SessionLog& log) {
  const auto bytes = serialize_log(log);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LogError("cannot write session log " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void validate_log(const SessionLog& log) {
  const auto& h = log.header;
  if (h.build != kBuildVersion) {
    throw LogError("session log: recorded by '" + h.build + "', this build is '" + kBuildVersion + "'");
  }
  if (config_hash(h.config_json, h.build) != h.config_hash) {
    throw LogError("session log: config hash mismatch (header " + hex(h.config_hash) + ", config " +
                   hex(config_hash(h.config_json, h.build)) + ")");
  }
  std::array<std::optional<double>, kTopicCount> last_stamp{};
  std::array<std::optional<std::uint32_t>, kTopicCount> last_seq{};
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const auto& r = log.records[i];
    const auto t = static_cast<std::size_t>(r.topic);
    const std::string where = "session log: record " + std::to_string(i) + " (" + topic_name(r.topic) + ")";
    if (last_stamp[t] && r.stamp < *last_stamp[t]) throw LogError(where + ": stamp goes backwards");
    if (last_seq[t] && r.seq <= *last_seq[t]) throw LogError(where + ": sequence number not increasing");
    if (r.topic == Topic::SessionEnd && i + 1 != log.records.size()) {
      throw LogError(where + ": session end is not the last record");
    }
    if (r.topic != Topic::OperatorCommand && r.topic != Topic::SessionEnd &&
        std::find(h.topics.begin(), h.topics.end(), r.topic) == h.topics.end()) {
      throw LogError(where + ": topic not announced in the header");
    }
    last_stamp[t] = r.stamp;
    last_seq[t] = r.seq;
  }
  if (!log.records.empty() && log.records.back().topic == Topic::SessionEnd) {
    const double end = log.records.back().stamp;
    for (const auto& r : log.records) {
      if (r.topic == Topic::OperatorCommand && r.stamp > end) {
        throw LogError("session log: command stamped after the session end");
      }
    }
  }
}

SessionRecorder::SessionRecorder(const WorldScene& scene, const SessionConfig& cfg, std::vector<Topic> topics) {
  auto& h = log_.header;
  h.scene_yaml = dump_scene(scene);
  h.config_json = json::parse(config_to_json(cfg)).dump();
  h.config_hash = config_hash(h.config_json);
  h.seed = cfg.seed;
  h.topics = std::move(topics);
}

void SessionRecorder::stream_to(const std::filesystem::path& path) {
  out_.emplace(path, std::ios::binary | std::ios::trunc);
  if (!*out_) throw LogError("cannot write session log " + path.string());
  std::vector<std::uint8_t> bytes = serialize_header(log_.header);
  for (const auto& r : log_.records) append_frame(bytes, r);
  out_->write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out_->flush();
}

void SessionRecorder::append(TelemetryFrame frame) {
  if (out_) {
    const auto bytes = encode_frame(frame);
    out_->write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out_->flush();
  }
  log_.records.push_back(std::move(frame));
}

SessionHooks SessionRecorder::hooks() {
  SessionHooks h;
  h.on_command = [this](const OperatorCommand& cmd, double t) {
    append(seq_.make(Topic::OperatorCommand, t, text_payload(command_to_json(cmd))));
  };
  h.on_outage = [this](double now, double from, double to) {
    append(seq_.make(Topic::OperatorCommand, now, text_payload(outage_json(from, to))));
  };
  h.on_downlink = [this](const Delivery& d) {
    const auto& topics = log_.header.topics;
    if (std::find(topics.begin(), topics.end(), d.frame.topic) != topics.end()) append(d.frame);
  };
  return h;
}

void SessionRecorder::finish(const Session& session) {
  append(seq_.make(Topic::SessionEnd, session.now(), encode_pose(session.onboard().state())));
}

bool ReplayResult::final_pose_identical() const {
  return recorded_final && replayed_final && encode_pose(*recorded_final) == encode_pose(*replayed_final);
}

ReplayResult replay_log(const SessionLog& log) {
  validate_log(log);
  ReplayResult result;
  if (log.records.empty() || log.records.back().topic != Topic::SessionEnd) {
    result.empty = log.records.empty();
    if (!result.empty) throw LogError("session log: no session end record (incomplete recording)");
    return result;
  }
  const auto& h = log.header;
  Session session(parse_scene(h.scene_yaml, "<log scene>"), config_from_json(h.config_json));

  std::vector<const TelemetryFrame*> expected;
  std::vector<const TelemetryFrame*> events;
  for (const auto& r : log.records) {
    if (r.topic == Topic::OperatorCommand) {
      events.push_back(&r);
    } else if (r.topic != Topic::SessionEnd) {
      expected.push_back(&r);
    }
  }
  SessionHooks hooks;
  hooks.on_downlink = [&](const Delivery& d) {
    if (std::find(h.topics.begin(), h.topics.end(), d.frame.topic) == h.topics.end()) return;
    const std::size_t i = result.frames_compared++;
    const bool same = i < expected.size() && *expected[i] == d.frame;
    if (!same) {
      if (result.mismatches++ == 0) {
        result.first_mismatch = "downlink frame " + std::to_string(i) + " (" + topic_name(d.frame.topic) +
                                " seq " + std::to_string(d.frame.seq) + ") differs from the recording";
      }
    }
  };
  session.set_hooks(hooks);

  const double end = log.records.back().stamp;
  std::size_t next = 0;
  while (true) {
    while (next < events.size() && events[next]->stamp <= session.now() + kTimeEpsilon) {
      const auto doc = json::parse(payload_text(events[next]->payload));
      if (doc.value("type", "") == "link_outage") {
        session.add_outage(doc.at("from").get<double>(), doc.at("to").get<double>());
      } else {
        session.ingest(command_from_json(doc.dump()));
        ++result.commands;
      }
      ++next;
    }
    if (session.now() >= end - kTimeEpsilon) break;
    session.step();
  }
  if (result.frames_compared != expected.size()) {
    if (result.mismatches++ == 0) {
      result.first_mismatch = "replay produced " + std::to_string(result.frames_compared) +
                              " downlink frames, the recording has " + std::to_string(expected.size());
    }
  }
  result.recorded_final = decode_pose(log.records.back().payload);
  result.replayed_final = session.onboard().state();
  result.duration = session.now();
  return result;
}

}  // namespace rover
