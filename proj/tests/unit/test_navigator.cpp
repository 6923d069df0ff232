#include "doctest.h"

#include <cmath>
#include <numbers>

#include "rover/planning/navigator.hpp"

using namespace rover;

namespace {

Costmap free_map(int w = 60, int h = 60) {
  GridGeometry g{0.1, {0.0, 0.0}, w, h};
  return Costmap(g, std::vector<std::uint8_t>(g.size(), cost::kFree));
}

RoverState at(double x, double y, double theta) {
  RoverState s;
  s.pose = {x, y, theta};
  return s;
}

}  // namespace

TEST_CASE("navigator: idle without a goal, active once planned") {
  Navigator nav;
  CHECK(nav.state() == NavState::Idle);
  CHECK(nav.control(at(1, 1, 0)) == Twist{});
  CHECK_FALSE(nav.on_map(free_map(), {1, 1, 0}));

  nav.set_goal({4.0, 1.0, 7.0, "g"});
  CHECK(nav.goal()->theta == doctest::Approx(wrap_angle(7.0)));
  CHECK(nav.control(at(1, 1, 0)) == Twist{});  // no map yet
  CHECK(nav.on_map(free_map(), {1, 1, 0}));
  REQUIRE(nav.path());
  CHECK(nav.state() == NavState::Active);
  const Twist cmd = nav.control(at(1.05, 1.05, 0));
  CHECK(cmd.v > 0.0);
  CHECK(nav.local_plan().poses.size() >= 2);

  SUBCASE("unchanged map keeps the same path object") {
    const auto before = nav.path();
    CHECK_FALSE(nav.on_map(free_map(), {1.1, 1.0, 0}));
    CHECK(nav.path() == before);
  }
  SUBCASE("cancel") {
    nav.cancel();
    CHECK(nav.state() == NavState::Idle);
    CHECK(nav.control(at(1, 1, 0)) == Twist{});
  }
}

TEST_CASE("navigator: rotates in place once within the position tolerance") {
  Navigator nav;
  nav.set_goal({2.05, 2.05, std::numbers::pi / 2, "turn"});
  nav.on_map(free_map(), {2.05, 2.05, 0});
  const Twist cmd = nav.control(at(2.05, 2.05, 0.0));
  CHECK(cmd.v == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(cmd.omega > 0.0);
  CHECK(nav.state() == NavState::Active);
  CHECK(nav.control(at(2.07, 2.03, std::numbers::pi / 2 - 0.01)) == Twist{});
  CHECK(nav.state() == NavState::Reached);
}

TEST_CASE("navigator: no path keeps the goal and recovers when the map opens") {
  Navigator nav;
  auto blocked = free_map();
  const CellIndex goal_cell = blocked.geometry().cell_of({4.05, 1.05});
  blocked.set(goal_cell, cost::kLethal);
  nav.set_goal({4.05, 1.05, 0.0, "g"});
  nav.on_map(blocked, {1.05, 1.05, 0});
  CHECK(nav.state() == NavState::NoPath);
  CHECK(nav.no_path_reason() == NoPathReason::BlockedGoal);
  CHECK(nav.control(at(1.05, 1.05, 0)) == Twist{});

  nav.on_map(free_map(), {1.05, 1.05, 0});
  CHECK(nav.state() == NavState::Active);
  CHECK_FALSE(nav.no_path_reason().has_value());
  CHECK(nav.path());
}

TEST_CASE("navigator: unknown start or goal cells are not planned through") {
  Navigator nav;
  GridGeometry g{0.1, {0.0, 0.0}, 40, 40};
  Costmap unknown(g, std::vector<std::uint8_t>(g.size(), cost::kUnknown));
  unknown.set(g.cell_of({1.05, 1.05}), cost::kFree);
  nav.set_goal({3.05, 1.05, 0.0, "g"});
  nav.on_map(unknown, {1.05, 1.05, 0});
  CHECK(nav.state() == NavState::NoPath);
  CHECK(nav.no_path_reason() == NoPathReason::BlockedGoal);
}

TEST_CASE("navigator: drives a straight run to the goal within tolerance") {
  NavigatorConfig cfg;
  Navigator nav(cfg);
  const auto map = free_map();
  RoverState s = at(1.0, 3.0, 0.0);
  nav.set_goal({3.0, 3.0, 0.0, "run"});
  nav.on_map(map, s.pose);
  for (int i = 0; i < 400 && nav.state() == NavState::Active; ++i) {
    const Twist cmd = nav.control(s);
    for (int k = 0; k < 2; ++k) s = step_rover(s, cmd, 0.05, cfg.params);
    CHECK(is_pose_admissible(map, s.pose, cfg.params.footprint) == Admissibility::Admissible);
  }
  CHECK(nav.state() == NavState::Reached);
  CHECK(distance(s.pose.position(), {3.0, 3.0}) <= cfg.goal_tolerance_xy);
  CHECK(std::abs(wrap_angle(s.pose.theta)) <= cfg.goal_tolerance_theta);
}
