#include "doctest.h"

#include <random>
#include <stdexcept>

#include "rover/locomotion/locomotion.hpp"

using namespace rover;

TEST_CASE("twist_to_wheels analytic cases") {
  CHECK(twist_to_wheels({0.1, 0.0}, 0.8) == WheelSpeeds{0.1, 0.1});
  const auto turn = twist_to_wheels({0.0, 0.25}, 0.8);
  CHECK(turn.v_left == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(turn.v_right == doctest::Approx(0.1).epsilon(1e-15));
  const auto mixed = twist_to_wheels({0.1, 0.25}, 0.8);
  CHECK(std::abs(mixed.v_left - 0.0) <= 1e-12);
  CHECK(std::abs(mixed.v_right - 0.2) <= 1e-12);
}

TEST_CASE("wheels_to_twist inverts the mixing") {
  const auto straight = wheels_to_twist({0.1, 0.1}, 0.8);
  CHECK(straight.v == doctest::Approx(0.1));
  CHECK(straight.omega == 0.0);
  const auto turn = wheels_to_twist({-0.1, 0.1}, 0.8);
  CHECK(turn.v == 0.0);
  CHECK(std::abs(turn.omega - 0.25) <= 1e-12);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const WheelSpeeds ws{u(rng), u(rng)};
    const auto back = twist_to_wheels(wheels_to_twist(ws, 0.8), 0.8);
    CHECK(std::abs(back.v_left - ws.v_left) <= 1e-12);
    CHECK(std::abs(back.v_right - ws.v_right) <= 1e-12);
  }
}

TEST_CASE("mixing identities and linearity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const Twist t{u(rng), u(rng)};
    const double b = 0.1 + std::abs(u(rng));
    const double k = u(rng);
    const auto ws = twist_to_wheels(t, b);
    CHECK(std::abs((ws.v_right - ws.v_left) - t.omega * b) <= 1e-12);
    CHECK(std::abs((ws.v_right + ws.v_left) - 2.0 * t.v) <= 1e-12);
    const auto scaled = twist_to_wheels({k * t.v, k * t.omega}, b);
    CHECK(std::abs(scaled.v_left - k * ws.v_left) <= 1e-12);
    CHECK(std::abs(scaled.v_right - k * ws.v_right) <= 1e-12);
  }
}

TEST_CASE("non-positive wheel track is rejected") {
  CHECK_THROWS_AS(twist_to_wheels({0.1, 0.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(wheels_to_twist({0.1, 0.1}, -1.0), std::invalid_argument);
}

TEST_CASE("limit_twist slews, clamps and leaves feasible commands alone") {
  const RoverParams p;
  const auto slewed = limit_twist({0.0, 0.0}, {0.1, 0.0}, 0.1, p);
  CHECK(slewed.v == doctest::Approx(0.03));

  Twist v{};
  for (int i = 0; i < 50; ++i) v = limit_twist(v, {0.5, 0.0}, 0.1, p);
  CHECK(v.v == doctest::Approx(0.1));
  v = limit_twist(v, {0.5, 0.0}, 0.1, p);
  CHECK(v.v == doctest::Approx(0.1));

  const Twist feasible{0.05, -0.2};
  CHECK(limit_twist({0.04, 0.0}, feasible, 0.1, p) == feasible);
  const auto once = limit_twist({0.0, 0.0}, {0.3, 0.9}, 0.1, p);
  CHECK(limit_twist(once, once, 0.1, p) == once);
  CHECK(std::abs(once.omega) <= p.omega_max);
  CHECK_THROWS(limit_twist({}, {}, 0.0, p));
}

TEST_CASE("lever mapping is proportional with a deadzone") {
  const RoverParams p;
  CHECK(levers_to_twist(1.0, 0.0, p) == Twist{0.1, 0.0});
  CHECK(levers_to_twist(0.0, 0.0, p) == Twist{0.0, 0.0});
  CHECK(levers_to_twist(0.04, -0.049, p) == Twist{0.0, 0.0});
  CHECK(levers_to_twist(-0.5, 1.0, p).v == doctest::Approx(-0.05));
  CHECK(levers_to_twist(3.0, -7.0, p) == Twist{0.1, -0.3});
}
