#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "procnav/kinematics.hpp"

using namespace procnav;
constexpr double kPi = std::numbers::pi;

TEST_CASE("normalize_angle maps into [-pi, pi)") {
  CHECK(normalize_angle(kPi) == -kPi);
  CHECK(normalize_angle(-kPi) == -kPi);
  CHECK(normalize_angle(0.0) == 0.0);
  CHECK(normalize_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2).epsilon(1e-15));
  CHECK(normalize_angle(2 * kPi) == doctest::Approx(0.0));
  CHECK_THROWS_AS(normalize_angle(std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(normalize_angle(INFINITY), std::invalid_argument);

  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> dist(-1e4, 1e4);
  for (int i = 0; i < 20000; ++i) {
    const double a = dist(gen);
    const double n = normalize_angle(a);
    REQUIRE(n >= -kPi);
    REQUIRE(n < kPi);
    REQUIRE(normalize_angle(n) == n);
    // Same direction as the input.
    REQUIRE(std::abs(std::sin(n) - std::sin(a)) < 1e-9);
    REQUIRE(std::abs(std::cos(n) - std::cos(a)) < 1e-9);
  }
}

TEST_CASE("integrate_step updates heading before position") {
  const Pose p = integrate_step({0, 0, 0}, {1.0, kPi / 2}, 1.0);
  CHECK(p.theta == doctest::Approx(kPi / 2));
  CHECK(p.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(1.0));
}

TEST_CASE("constant twist converges to the analytic arc") {
  const auto exact = oracle::arc_endpoint(1.0, kPi / 2, 1.0);
  auto run = [](double dt) {
    Pose p;
    const long n = std::lround(1.0 / dt);
    for (long k = 0; k < n; ++k) p = integrate_step(p, {1.0, kPi / 2}, dt);
    return p;
  };
  const Pose fine = run(1e-4);
  CHECK(std::hypot(fine.x - exact.x, fine.y - exact.y) < 1e-3);

  const Pose a = run(0.05), b = run(0.025);
  const double ea = std::hypot(a.x - exact.x, a.y - exact.y);
  const double eb = std::hypot(b.x - exact.x, b.y - exact.y);
  CHECK(ea / eb >= 1.8);

  const auto ref = oracle::euler_endpoint(1.0, kPi / 2, 1.0, 0.05);
  CHECK(a.x == doctest::Approx(ref.x).epsilon(1e-12));
  CHECK(a.y == doctest::Approx(ref.y).epsilon(1e-12));
}

TEST_CASE("oscillator profile") {
  OscillatorParams p{0.8, 0.3, 1.0, 2.0, 0.1};
  CHECK(oscillatory_omega(p, p.onset) == p.bias);
  for (int i = 0; i < 1000; ++i) {
    const double t = i * 0.013;
    CHECK(std::abs(oscillatory_omega(p, t) - p.bias) <= p.amplitude * std::exp(-p.damping * t) + 1e-15);
  }
  CHECK_THROWS_AS((OscillatorParams{1, 0, 0, 0, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((OscillatorParams{1, -1, 0, 1, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((OscillatorParams{-1, 0, 0, 1, 0}.validate()), std::invalid_argument);
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("clamp_twist and clock") {
  Twist t{2.0, -5.0};
  CHECK(clamp_twist(t, {}));
  CHECK(t.linear == 1.0);
  CHECK(t.angular == -kPi);
  Twist ok{0.5, 0.5};
  CHECK_FALSE(clamp_twist(ok, {}));

  SimClock clock(0.05);
  for (int i = 0; i < 1000; ++i) clock.advance();
  CHECK(clock.tick() == 1000);
  CHECK(clock.time() == 50.0);
}
