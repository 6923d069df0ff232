#include "doctest.h"

#include <cmath>
#include <random>

#include "rover/telemetry/frame.hpp"
#include "rover/telemetry/link.hpp"
#include "rover/telemetry/payloads.hpp"
#include "rover/telemetry/replay.hpp"
#include "rover/telemetry/stats.hpp"

using namespace rover;

namespace {

std::vector<std::uint8_t> random_bytes(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng());
  return b;
}

FrameErrorKind error_kind(std::span<const std::uint8_t> bytes) {
  try {
    decode_frame(bytes);
  } catch (const FrameError& e) {
    return e.kind();
  }
  FAIL("decode succeeded");
  return FrameErrorKind::BadMagic;
}

LinkConfig delayed(double seconds) {
  LinkConfig cfg;
  cfg.one_way_delay = seconds;
  return cfg;
}

}  // namespace

TEST_CASE("frame: empty payload round-trip and layout") {
  const TelemetryFrame f{Topic::GoalAck, 7, 12.5, {}};
  const auto wire = encode_frame(f);
  CHECK(wire.size() == kFrameOverhead);
  CHECK(kFrameOverhead == 25);
  CHECK(decode_frame(wire) == f);
  // magic, little-endian
  CHECK(wire[0] == 0x52);
  CHECK(wire[3] == 0x4C);
  CHECK(wire[4] == static_cast<std::uint8_t>(Topic::GoalAck));
  CHECK(wire[5] == 7);
}

TEST_CASE("frame: random payloads round-trip") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    TelemetryFrame f{static_cast<Topic>(rng() % kTopicCount), static_cast<std::uint32_t>(rng()),
                     std::uniform_real_distribution<double>(0, 1e6)(rng), random_bytes(rng, 1024)};
    std::size_t used = 0;
    auto wire = encode_frame(f);
    wire.push_back(0xAA);  // trailing bytes belong to the next frame
    CHECK(decode_frame(wire, &used) == f);
    CHECK(used == f.wire_size());
  }
}

TEST_CASE("frame: corruption is reported by kind") {
  std::mt19937_64 rng(2);
  const TelemetryFrame f{Topic::CostMap2D, 1, 0.25, random_bytes(rng, 1024)};
  const auto wire = encode_frame(f);

  auto flipped = wire;
  flipped[30] ^= 0x10;
  CHECK(error_kind(flipped) == FrameErrorKind::CrcMismatch);

  auto magic = wire;
  magic[1] ^= 0xFF;
  CHECK(error_kind(magic) == FrameErrorKind::BadMagic);

  CHECK(error_kind(std::span(wire).first(wire.size() - 1)) == FrameErrorKind::Truncated);
  CHECK(error_kind(std::span(wire).first(10)) == FrameErrorKind::Truncated);

  auto topic = encode_frame({static_cast<Topic>(200), 0, 0.0, {}});
  CHECK(error_kind(topic) == FrameErrorKind::UnknownTopic);

  std::vector<std::uint8_t> huge(kMaxPayload + 1);
  CHECK_THROWS_AS(encode_frame({Topic::MapCloud, 0, 0.0, huge}), FrameError);
  CHECK(std::string(to_string(FrameErrorKind::CrcMismatch)) != to_string(FrameErrorKind::Truncated));
}

TEST_CASE("sequencer numbers each topic independently") {
  FrameSequencer seq;
  CHECK(seq.make(Topic::RoverPose, 0, {}).seq == 0);
  CHECK(seq.make(Topic::RoverPose, 0, {}).seq == 1);
  CHECK(seq.make(Topic::ImageLeft, 0, {}).seq == 0);
}

TEST_CASE("payload round-trips") {
  RoverState s{{1.5, -2.0, 0.3}, {0.1, -0.2}, 42.0};
  const auto ds = decode_pose(encode_pose(s));
  CHECK(ds.pose == s.pose);
  CHECK(ds.twist == s.twist);
  CHECK(ds.time == s.time);

  const GridGeometry g{0.1, {-1.0, 2.0}, 7, 5};
  std::vector<std::uint8_t> costs(g.size());
  for (std::size_t i = 0; i < costs.size(); ++i) costs[i] = static_cast<std::uint8_t>(i * 7);
  const Costmap cm(g, costs, 3.25);
  const auto payload = encode_costmap(cm);
  CHECK(payload.size() == 40 + 35);
  CHECK(decode_costmap(payload) == cm);
  CHECK_THROWS(decode_costmap(std::span(payload).first(50)));

  const PathPayload path{{{0, 0, 0}, {1, 2, 3}}, 17.5};
  CHECK(decode_path(encode_path(path)) == path);

  TebTrajectory t;
  t.poses = {{0, 0, 0}, {0.2, 0, 0}, {0.4, 0, 0}};
  t.dts = {2.0, 4.0};
  const auto lp = decode_local_plan(encode_local_plan(t));
  CHECK(lp.poses == t.poses);
  CHECK(lp.velocities == std::vector<double>{0.1, 0.05});

  const std::vector<CloudPoint> cloud{{1, 2, 3, 0xFF00FF}, {-1, 0.5f, 0, 7}};
  CHECK(decode_cloud(encode_cloud(cloud)) == cloud);
  CHECK(encode_cloud(cloud).size() == 4 + 32);

  const GoalAck ack{"goal-17", {1, 2, -0.5}};
  CHECK(decode_goal_ack(encode_goal_ack(ack)) == ack);
  CHECK(payload_text(text_payload("{\"a\":1}")) == "{\"a\":1}");
}

TEST_CASE("JPEG encoding is decodable and quality dependent") {
  Image img{64, 48, std::vector<std::uint8_t>(64 * 48 * 3)};
  for (int v = 0; v < 48; ++v)
    for (int u = 0; u < 64; ++u) {
      img.pixel(u, v)[0] = static_cast<std::uint8_t>(u * 4);
      img.pixel(u, v)[1] = static_cast<std::uint8_t>(v * 5);
      img.pixel(u, v)[2] = static_cast<std::uint8_t>((u ^ v) * 3);
    }
  const auto q80 = encode_jpeg(img, 80);
  const auto q20 = encode_jpeg(img, 20);
  CHECK(q80.size() > q20.size());
  CHECK(q80[0] == 0xFF);
  CHECK(q80[1] == 0xD8);
  const auto back = decode_jpeg(q80);
  CHECK(back.width == 64);
  CHECK(back.height == 48);
  CHECK(std::abs(int(back.pixel(10, 10)[0]) - int(img.pixel(10, 10)[0])) < 20);
  CHECK_THROWS(decode_jpeg(std::vector<std::uint8_t>{1, 2, 3}));
}

TEST_CASE("stats: no frames gives zero rates") {
  TopicStats stats(1.0);
  const auto r = budget_report(stats, 5.0);
  CHECK(r.rows.size() == 5);
  for (const auto& row : r.rows) CHECK(row.mbps == 0.0);
  CHECK(r.total_mbps == 0.0);
}

TEST_CASE("stats: 64688-byte JPEG frames at 4 Hz") {
  TopicStats stats(10.0);
  for (int k = 0; k < 80; ++k) {
    account(stats, TelemetryFrame{Topic::ImageLeft, static_cast<std::uint32_t>(k), k * 0.25,
                                  std::vector<std::uint8_t>(64688)},
            k * 0.25);
  }
  const double rate = stats.rate_mbps(Topic::ImageLeft, 19.75);
  const double overhead = 8.0 * kFrameOverhead * 4 / 1e6;
  CHECK(std::abs(rate - 2.07) <= 0.005 + overhead);
  CHECK(stats.bytes_total(Topic::ImageLeft) == 80u * (64688 + kFrameOverhead));
}

TEST_CASE("stats: single topic total and additivity") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    TopicStats stats(2.0);
    double t = 0.0;
    const bool single = trial % 5 == 0;
    for (int k = 0; k < 200; ++k) {
      t += std::uniform_real_distribution<double>(0.0, 0.05)(rng);
      const auto topic = single ? Topic::CostMap2D : static_cast<Topic>(rng() % kTopicCount);
      account(stats, TelemetryFrame{topic, 0, t, std::vector<std::uint8_t>(rng() % 5000)}, t);
    }
    const auto r = budget_report(stats, t);
    double sum = 0.0;
    std::uint64_t bytes = 0, window_bytes = 0;
    for (const auto& row : r.rows) {
      sum += row.mbps;
      bytes += row.bytes_total;
      window_bytes += row.window_bytes;
    }
    CHECK(r.total_mbps == sum);
    CHECK(r.total_bytes == bytes);
    CHECK(r.total_window_bytes == window_bytes);
    CHECK(bytes == stats.link_bytes());
    if (single) CHECK(r.total_mbps == stats.rate_mbps(Topic::CostMap2D, t));
    CHECK(r.to_text().find("TOTAL") != std::string::npos);
    CHECK(r.to_csv().find("total,") != std::string::npos);
    CHECK(r.to_json().find("\"rows\"") != std::string::npos);
  }
}

TEST_CASE("reference stream replay reproduces every row") {
  const auto streams = reference_streams();
  const auto stats = replay_streams(streams, 20.0, 10.0);
  const auto r = budget_report(stats, 19.999);
  REQUIRE(r.rows.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(r.rows[i].topic == streams[i].topic);
    CHECK(r.rows[i].mbps == doctest::Approx(streams[i].mbps).epsilon(1e-9));
  }
  CHECK(std::abs(r.total_mbps - 38.53) <= 0.005 * 38.53);
}

TEST_CASE("latency parsing") {
  CHECK(parse_latency("0") == 0.0);
  CHECK(parse_latency("410ms") == doctest::Approx(0.41));
  CHECK(parse_latency("0.41") == 0.41);
  CHECK(parse_latency("1.5s") == 1.5);
  CHECK_THROWS(parse_latency("fast"));
  CHECK_THROWS(parse_latency("-1"));
  CHECK_THROWS(parse_latency("10msx"));
}

TEST_CASE("link: zero delay and fixed delay") {
  LinkChannel zero;
  zero.send({Topic::OperatorCommand, 0, 1.0, {}}, 1.0);
  auto d = zero.poll(1.0);
  REQUIRE(d.size() == 1);
  CHECK(d[0].delivered == 1.0);

  LinkChannel moon(delayed(0.410));
  moon.send({Topic::OperatorCommand, 0, 2.0, {}}, 2.0);
  CHECK(moon.poll(2.409).empty());
  d = moon.poll(2.5);
  REQUIRE(d.size() == 1);
  CHECK(d[0].delivered == doctest::Approx(2.41));
  CHECK_THROWS(LinkChannel(delayed(-1.0)));
}

TEST_CASE("link: ordering and latency floor under random traffic") {
  std::mt19937_64 rng(4);
  LinkChannel link(LinkConfig{0.41, 5.0, DropPolicy::DropOldestPerTopic});
  FrameSequencer seq;
  std::array<std::int64_t, kTopicCount> last{};
  last.fill(-1);
  double t = 0.0;
  std::uint64_t received = 0;
  for (int k = 0; k < 3000; ++k) {
    t += 0.01;
    const auto topic = static_cast<Topic>(rng() % 8);
    link.send(seq.make(topic, t, std::vector<std::uint8_t>(rng() % 8000)), t);
    for (const auto& d : link.poll(t)) {
      ++received;
      CHECK(d.delivered >= d.sent + 0.41 - 1e-12);
      CHECK(d.delivered <= t);
      const auto i = static_cast<std::size_t>(d.frame.topic);
      CHECK(static_cast<std::int64_t>(d.frame.seq) > last[i]);
      last[i] = d.frame.seq;
    }
  }
  for (const auto& d : link.poll(1e9)) (void)d, ++received;
  CHECK(received + link.frames_dropped() == link.frames_sent());
}

TEST_CASE("link: congested map traffic keeps the freshest frame") {
  // 1 Mb/s link, 12500-byte costmap frames every 50 ms: 2 Mb/s offered.
  LinkChannel link(LinkConfig{0.0, 1.0, DropPolicy::DropOldestPerTopic});
  FrameSequencer seq;
  const std::size_t payload = 12500 - kFrameOverhead;
  std::vector<Delivery> got;
  const int frames = 200;
  for (int k = 0; k < frames; ++k) {
    const double t = 0.05 * k;
    link.send(seq.make(Topic::CostMap2D, t, std::vector<std::uint8_t>(payload)), t);
    for (auto& d : link.poll(t)) got.push_back(std::move(d));
  }
  for (auto& d : link.poll(1e9)) got.push_back(std::move(d));

  // Reference queue: one frame on the wire (0.1 s each) and at most one
  // waiting; a newer arrival replaces the waiting frame.
  std::vector<std::uint32_t> expected;
  double busy_until = 0.0;
  std::optional<int> waiting;
  auto drain_until = [&](double t) {
    while (waiting && busy_until <= t) {
      expected.push_back(static_cast<std::uint32_t>(*waiting));
      busy_until = std::max(busy_until, 0.05 * *waiting) + 0.1;
      waiting.reset();
    }
  };
  for (int k = 0; k < frames; ++k) {
    const double t = 0.05 * k;
    drain_until(t);
    waiting = k;
    drain_until(t);
  }
  drain_until(1e9);

  std::vector<std::uint32_t> delivered;
  for (const auto& d : got) delivered.push_back(d.frame.seq);
  CHECK(delivered == expected);
  REQUIRE(!got.empty());
  CHECK(got.back().frame.seq == frames - 1);
  CHECK(link.frames_dropped() == frames - got.size());
  CHECK(link.frames_dropped() >= frames / 2 - 2);
  // delivered throughput never exceeds the cap
  const double span = got.back().delivered - got.front().sent;
  CHECK(8.0 * static_cast<double>(link.bytes_delivered()) / span / 1e6 <= 1.0 + 1e-9);
}

TEST_CASE("link: commands are never superseded and outages hold frames") {
  LinkChannel link(LinkConfig{0.1, 0.5, DropPolicy::DropOldestPerTopic});
  link.add_outage(1.0, 2.0);
  CHECK_FALSE(link.is_up(1.5));
  CHECK(link.is_up(2.0));
  for (int k = 0; k < 10; ++k) link.send({Topic::OperatorCommand, static_cast<std::uint32_t>(k), 1.0 + 0.05 * k, std::vector<std::uint8_t>(100)}, 1.0 + 0.05 * k);
  CHECK(link.poll(2.05).empty());
  const auto all = link.poll(10.0);
  CHECK(all.size() == 10);
  CHECK(link.frames_dropped() == 0);
  CHECK(all.front().delivered >= 2.1);
}
