#include <doctest.h>

#include <numbers>

#include "procnav/sensors.hpp"

using namespace procnav;
constexpr double kPi = std::numbers::pi;

namespace {

WorldState box_room() {
  WorldState w;
  w.walls = {{{0, 0}, {6, 0}}, {{6, 0}, {6, 6}}, {{6, 6}, {0, 6}}, {{0, 6}, {0, 0}}};
  w.agents.push_back({0, {2, 3, 0}, std::nullopt, 0, {}});
  return w;
}

}  // namespace

TEST_CASE("beam layout") {
  LidarConfig c;
  c.beam_count = 5;
  c.fov = kPi;
  CHECK(c.angle_min() == doctest::Approx(-kPi / 2));
  CHECK(c.angle_increment() == doctest::Approx(kPi / 4));
  c.fov = 2 * kPi;
  c.beam_count = 4;
  CHECK(c.angle_increment() == doctest::Approx(kPi / 2));
  c.beam_count = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.beam_count = 3;
  c.fov = 7.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("ranges to walls, balls and agents") {
  WorldState w = box_room();
  LidarConfig c;
  c.fov = 2 * kPi;
  c.beam_count = 4;
  auto scan = lidar_scan(w, 0, c);
  REQUIRE(scan.ranges.size() == 4);
  CHECK(scan.ranges[0] == doctest::Approx(2.0));  // -pi: toward x = 0
  CHECK(scan.ranges[1] == doctest::Approx(3.0));
  CHECK(scan.ranges[2] == doctest::Approx(4.0));
  CHECK(scan.ranges[3] == doctest::Approx(3.0));

  w.balls.push_back({0, Color::Red, {4, 3}, 0.1, std::nullopt});
  w.agents.push_back({1, {2, 5, 0}, std::nullopt, 0, {}});
  scan = lidar_scan(w, 0, c);
  CHECK(scan.ranges[2] == doctest::Approx(1.9));
  CHECK(scan.ranges[3] == doctest::Approx(2.0 - w.params.robot_radius));

  // A carried ball does not block its carrier.
  w.balls[0].carried_by = 0;
  w.balls[0].position = {2, 3};
  CHECK(lidar_scan(w, 0, c).ranges[2] == doctest::Approx(4.0));

  c.max_range = 1.5;
  for (double r : lidar_scan(w, 0, c).ranges) CHECK(r <= 1.5);
  CHECK_THROWS_AS(lidar_scan(w, 9, c), UnknownAgentError);
}

TEST_CASE("odometry noise statistics") {
  const WorldState w = box_room();
  Rng rng(17);
  CHECK(sample_odometry(w, 0, {}, rng).pose == w.agents[0].pose);
  const OdometryNoise n{0.1, 0.05};
  double sx = 0, sxx = 0, st = 0, stt = 0;
  const int count = 20000;
  for (int i = 0; i < count; ++i) {
    const auto s = sample_odometry(w, 0, n, rng);
    const double dx = s.pose.x - 2, dt = s.pose.theta;
    sx += dx;
    sxx += dx * dx;
    st += dt;
    stt += dt * dt;
  }
  CHECK(std::abs(sx / count) < 0.005);
  CHECK(std::sqrt(sxx / count) == doctest::Approx(0.1).epsilon(0.03));
  CHECK(std::sqrt(stt / count) == doctest::Approx(0.05).epsilon(0.03));
  CHECK_THROWS_AS(sample_odometry(w, 0, {-1, 0}, rng), std::invalid_argument);
}
