#include "doctest.h"

#include <cmath>
#include <numbers>
#include <cstring>
#include <random>

#include "rover/world/camera.hpp"
#include "rover/world/depth_sensor.hpp"
#include "rover/world/rover_model.hpp"
#include "rover/world/scene.hpp"
#include "oracles.hpp"
#include "printers.hpp"
#include "test_util.hpp"

using namespace rover;

namespace {

Pose2D fine_step_oracle(const Pose2D& p0, const Twist& tw, double dt, int steps) {
  Pose2D p = p0;
  const double h = dt / steps;
  for (int i = 0; i < steps; ++i) {
    // midpoint rule keeps the oracle well inside 1e-6 at 1e4 substeps
    const double mid = p.theta + 0.5 * tw.omega * h;
    p.x += tw.v * std::cos(mid) * h;
    p.y += tw.v * std::sin(mid) * h;
    p.theta += tw.omega * h;
  }
  return p;
}

constexpr const char* kEmptyScene = R"(name: empty
bounds: {min: [0, 0], max: [10, 10]}
obstacles: []
)";

}  // namespace

TEST_CASE("load_scene: empty scene") {
  const auto path = testing::write_temp("empty.yaml", kEmptyScene);
  const auto scene = load_scene(path);
  CHECK(scene.obstacles.empty());
  CHECK(scene.bounds.width() == 10.0);
  CHECK(scene.name == "empty");
}

TEST_CASE("load_scene: heights are preserved and parsing is deterministic") {
  const std::string text = R"(name: two boxes
seed: 42
bounds: {min: [0, 0], max: [10, 10]}
obstacles:
  - {id: low, shape: box, min: [1, 1], max: [2, 2], height_m: 0.1}
  - {id: high, shape: box, min: [5, 5], max: [6, 7], height_m: 0.5}
)";
  const auto a = parse_scene(text);
  const auto b = parse_scene(dump_scene(a));
  REQUIRE(a.obstacles.size() == 2);
  CHECK(a.obstacles[0].height == 0.1);
  CHECK(a.obstacles[1].height == 0.5);
  CHECK(a.seed == 42);
  CHECK(b.obstacles[1].height == 0.5);
  CHECK(dump_scene(a) == dump_scene(b));
}

TEST_CASE("load_scene: diagnostics") {
  const std::string outside = R"(name: bad
bounds: {min: [0, 0], max: [10, 10]}
obstacles:
  - {id: rock7, shape: circle, center: [9.9, 5], radius: 0.5, height_m: 0.3}
)";
  try {
    parse_scene(outside);
    FAIL("expected SceneError");
  } catch (const SceneError& e) {
    CHECK(std::string(e.what()).find("rock7") != std::string::npos);
  }
  const std::string missing = "name: x\nbounds: {min: [0, 0], max: [1, 1]}\nobstacles:\n  - {shape: box, min: [0, 0]}\n";
  try {
    parse_scene(missing, "f.yaml");
    FAIL("expected SceneError");
  } catch (const SceneError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("f.yaml:4") != std::string::npos);
    CHECK(msg.find("height_m") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scene("name: [unclosed"), SceneError);
  CHECK_THROWS_AS(load_scene("/nonexistent/scene.yaml"), SceneError);
  CHECK_THROWS_AS(parse_scene("name: x\nbounds: {min: [0, 0], max: [0, 1]}\n"), SceneError);
}

TEST_CASE("step_rover: straight line and point turn") {
  const RoverParams p{.omega_max = 2.0};
  RoverState s;
  s.twist = {0.1, 0.0};
  const auto straight = step_rover(s, {0.1, 0.0}, 1.0, p);
  CHECK(straight.pose.x == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(straight.pose.y == 0.0);
  CHECK(straight.pose.theta == 0.0);

  RoverState r;
  const auto turn = step_rover(r, {0.0, std::numbers::pi / 2}, 1.0, p);
  CHECK(turn.pose.x == 0.0);
  CHECK(turn.pose.y == 0.0);
  CHECK(turn.pose.theta == doctest::Approx(std::numbers::pi / 2));
  CHECK_THROWS_AS(step_rover(r, {}, 0.0, p), std::invalid_argument);
}

TEST_CASE("step_rover: exact arc agrees with fine-step integration") {
  const RoverParams p;
  RoverState s;
  s.twist = {0.1, 0.1};
  const auto next = step_rover(s, {0.1, 0.1}, 1.0, p);
  const Pose2D oracle = fine_step_oracle(s.pose, {0.1, 0.1}, 1.0, 10000);
  CHECK(std::abs(next.pose.x - oracle.x) < 1e-6);
  CHECK(std::abs(next.pose.y - oracle.y) < 1e-6);
  CHECK(std::abs(next.pose.theta - oracle.theta) < 1e-6);
}

TEST_CASE("step_rover invariants") {
  const RoverParams p;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    RoverState s;
    s.pose = {u(rng) * 5, u(rng) * 5, u(rng) * 3};
    const Twist cmd{0.1 * u(rng), 0.3 * u(rng)};
    s.twist = cmd;
    const double dt = 0.05 + std::abs(u(rng));

    const auto one = step_rover(s, cmd, dt, p);
    const auto half = step_rover(step_rover(s, cmd, dt / 2, p), cmd, dt / 2, p);
    CHECK(std::abs(one.pose.x - half.pose.x) < 1e-9);
    CHECK(std::abs(one.pose.y - half.pose.y) < 1e-9);
    CHECK(std::abs(wrap_angle(one.pose.theta - half.pose.theta)) < 1e-9);

    RoverState straight = s;
    straight.twist = {cmd.v, 0.0};
    CHECK(step_rover(straight, {cmd.v, 0.0}, dt, p).pose.theta == s.pose.theta);
    RoverState spin = s;
    spin.twist = {0.0, cmd.omega};
    const auto spun = step_rover(spin, {0.0, cmd.omega}, dt, p);
    CHECK(spun.pose.x == s.pose.x);
    CHECK(spun.pose.y == s.pose.y);
  }
}

TEST_CASE("step_rover applies the speed clamp and slew limit") {
  const RoverParams p;
  RoverState s;
  const double dt = 0.05;
  double prev = 0.0;
  for (int i = 0; i < 100; ++i) {
    s = step_rover(s, {1.0, 5.0}, dt, p);
    CHECK(std::abs(s.twist.v) <= 0.1 + 1e-12);
    CHECK(std::abs(s.twist.omega) <= 0.3 + 1e-12);
    CHECK(std::abs(s.twist.v - prev) / dt <= 0.3 + 1e-9);
    CHECK(s.pose.theta > -std::numbers::pi);
    CHECK(s.pose.theta <= std::numbers::pi);
    prev = s.twist.v;
  }
}

TEST_CASE("sense_depth: wall ahead and empty scene") {
  WorldScene scene = parse_scene(kEmptyScene);
  RoverState s;
  s.pose = {1.0, 5.0, 0.0};
  const DepthSensorConfig cfg;
  const auto empty = sense_depth(s, scene, cfg);
  REQUIRE(empty.rays.size() == 180);
  for (const auto& r : empty.rays) CHECK_FALSE(r.range.has_value());

  scene.obstacles.push_back({"wall", Box{{3.0, 0.5}, {3.5, 9.5}}, 1.0});
  const auto scan = sense_depth(s, scene, cfg);
  for (const auto& r : scan.rays) {
    REQUIRE(r.range.has_value());
    CHECK(*r.range * std::cos(r.azimuth) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.hit_height == 1.0);
  }
  // strictly increasing azimuths over [-fov/2, fov/2]
  CHECK(scan.rays.front().azimuth == doctest::Approx(-cfg.fov / 2));
  CHECK(scan.rays.back().azimuth == doctest::Approx(cfg.fov / 2));
  for (std::size_t i = 1; i < scan.rays.size(); ++i) CHECK(scan.rays[i].azimuth > scan.rays[i - 1].azimuth);
  // the central rays see the wall face head on
  CHECK(*scan.rays[89].range == doctest::Approx(2.0 / std::cos(scan.rays[89].azimuth)));
}

TEST_CASE("sense_depth: analytic intersection oracle on random scenes") {
  std::mt19937_64 rng(99);
  const DepthSensorConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    const auto scene = testing::random_scene(rng, 12.0, 12, {6.0, 6.0}, 0.5);
    RoverState s;
    s.pose = {6.0, 6.0, std::uniform_real_distribution<double>(-3, 3)(rng)};
    const auto scan = sense_depth(s, scene, cfg);
    for (const auto& ray : scan.rays) {
      const double a = s.pose.theta + ray.azimuth;
      const Vec2 d{std::cos(a), std::sin(a)};
      std::optional<double> best;
      for (const auto& ob : scene.obstacles) {
        if (const auto t = oracle::hit_distance(ob, s.pose.position(), d); t && *t <= cfg.max_range && (!best || *t < *best))
          best = t;
      }
      REQUIRE(best.has_value() == ray.range.has_value());
      if (best) {
        CHECK(std::abs(*best - *ray.range) < 1e-9);
        CHECK(*ray.range <= cfg.max_range);
        CHECK(*ray.range > 0.0);
      }
    }
  }
}

TEST_CASE("DepthSensor noise is reproducible for a fixed seed") {
  WorldScene scene = parse_scene(kEmptyScene);
  scene.obstacles.push_back({"wall", Box{{3.0, 0.5}, {3.5, 9.5}}, 1.0});
  DepthSensorConfig cfg;
  cfg.range_noise_sigma = 0.02;
  RoverState s;
  s.pose = {1.0, 5.0, 0.0};
  DepthSensor a(cfg, 5), b(cfg, 5);
  const auto sa = a.sense(s, scene);
  const auto sb = b.sense(s, scene);
  bool any_noise = false;
  for (std::size_t i = 0; i < sa.rays.size(); ++i) {
    CHECK(*sa.rays[i].range == *sb.rays[i].range);
    any_noise |= std::abs(*sa.rays[i].range * std::cos(sa.rays[i].azimuth) - 2.0) > 1e-6;
  }
  CHECK(any_noise);
}

TEST_CASE("render_camera: empty scene is deterministic sky and ground") {
  const auto scene = parse_scene(kEmptyScene);
  RoverState s;
  s.pose = {5, 5, 0.3};
  const auto a = render_camera(s, scene);
  const auto b = render_camera(s, scene);
  CHECK(a.width == 1280);
  CHECK(a.height == 720);
  CHECK(a == b);
  // uniform rows
  CHECK(a.pixel(0, 100)[2] == a.pixel(1279, 100)[2]);
  CHECK(a.pixel(0, 600)[0] == a.pixel(1279, 600)[0]);
  CHECK_THROWS(render_camera(s, scene, CameraConfig{.width = 0}));
}

namespace {

// Columns whose colour differs from the background at the horizon row.
std::pair<int, int> occluder_columns(const Image& img, const Image& background) {
  const int row = img.height / 2 + 5;
  int first = -1, last = -1;
  for (int u = 0; u < img.width; ++u) {
    if (std::memcmp(img.pixel(u, row), background.pixel(u, row), 3) != 0) {
      if (first < 0) first = u;
      last = u;
    }
  }
  return {first, last};
}

}  // namespace

TEST_CASE("render_camera: pinhole geometry of an occluder") {
  auto scene = parse_scene(kEmptyScene);
  RoverState s;
  s.pose = {1.0, 5.0, 0.0};
  const auto background = render_camera(s, scene);

  scene.obstacles.push_back({"near", Box{{3.0, 4.75}, {3.2, 5.25}}, 0.8});
  const auto near_img = render_camera(s, scene);
  const auto [n0, n1] = occluder_columns(near_img, background);
  REQUIRE(n0 >= 0);
  // centered in the frame
  CHECK(std::abs((n0 + n1 + 1) / 2.0 - 640.0) <= 1.0);

  scene.obstacles.back().shape = Box{{5.0, 4.75}, {5.2, 5.25}};
  const auto far_img = render_camera(s, scene);
  const auto [f0, f1] = occluder_columns(far_img, background);
  const double near_width = n1 - n0 + 1;
  const double far_width = f1 - f0 + 1;
  // pinhole: width = f * w / z; face depth 2 m vs 4 m
  const double focal = CameraConfig{}.focal();
  CHECK(std::abs(near_width - focal * 0.5 / 2.0) <= 1.0);
  CHECK(std::abs(far_width - near_width / 2.0) <= 1.0);
}

TEST_CASE("scene: optional start pose") {
  const auto s = parse_scene("name: s\nstart: [1.5, 2.0, 0.5]\nbounds: {min: [0, 0], max: [4, 4]}\n");
  CHECK(s.start == Pose2D{1.5, 2.0, 0.5});
  CHECK(parse_scene(dump_scene(s)).start == s.start);
  CHECK(parse_scene("name: s\nbounds: {min: [0, 0], max: [4, 4]}\n").start == Pose2D{});
  CHECK_THROWS_AS(parse_scene("name: s\nstart: [9, 2, 0]\nbounds: {min: [0, 0], max: [4, 4]}\n").validate(),
                  SceneError);
  CHECK_THROWS_AS(parse_scene("name: s\nstart: [1, 2]\nbounds: {min: [0, 0], max: [4, 4]}\n"), SceneError);
}
