#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "procnav/geometry.hpp"

using namespace procnav;

TEST_CASE("ray casts") {
  const Vec2 o{0, 0}, dx{1, 0};
  CHECK(*ray_segment(o, dx, {{2, -1}, {2, 1}}) == doctest::Approx(2.0));
  CHECK_FALSE(ray_segment(o, dx, {{-2, -1}, {-2, 1}}));
  CHECK_FALSE(ray_segment(o, dx, {{2, 1}, {3, 1}}));
  CHECK(*ray_circle(o, dx, {{5, 0}, 1}) == doctest::Approx(4.0));
  CHECK(*ray_circle(o, dx, {{0, 0}, 1}) == doctest::Approx(1.0));
  CHECK_FALSE(ray_circle(o, dx, {{5, 2}, 1}));
  const OrientedRect r{{3, 0}, {0.5, 0.5}, std::numbers::pi / 4};
  CHECK(*ray_rect(o, dx, r) == doctest::Approx(3.0 - std::sqrt(0.5)));
}

TEST_CASE("distances agree with brute-force sampling") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const OrientedRect a{{u(gen), u(gen)}, {0.2 + std::abs(u(gen)) / 3, 0.2 + std::abs(u(gen)) / 3}, u(gen)};
    const Circle c{{u(gen), u(gen)}, 0.1 + std::abs(u(gen)) / 4};
    const double d = circle_rect_distance(c, a);
    const auto rb = oracle::rect_boundary(a.center, a.half_extents, a.rotation, 200);
    const bool inside = oracle::in_rect(c.center, a.center, a.half_extents, a.rotation);
    if (inside) {
      CHECK(d == 0.0);
      continue;
    }
    double best = 1e9;
    for (const auto& p : rb) best = std::min(best, std::hypot(p.x - c.center.x, p.y - c.center.y));
    const double expect = std::max(0.0, best - c.radius);
    CHECK(d == doctest::Approx(expect).epsilon(0.02).scale(1.0));
  }
}

TEST_CASE("point-segment and segment-segment distances") {
  const Segment s{{0, 0}, {2, 0}};
  CHECK(point_segment_distance({1, 1}, s) == doctest::Approx(1.0));
  CHECK(point_segment_distance({3, 0}, s) == doctest::Approx(1.0));
  CHECK(segment_segment_distance(s, {{1, -1}, {1, 1}}) == 0.0);
  CHECK(segment_segment_distance(s, {{0, 1}, {2, 2}}) == doctest::Approx(1.0));
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 500; ++i) {
    const Vec2 p{u(gen), u(gen)};
    const Segment t{{u(gen), u(gen)}, {u(gen), u(gen)}};
    CHECK(point_segment_distance(p, t) == doctest::Approx(oracle::seg_dist(p, t.a, t.b)));
  }
}

TEST_CASE("containment and overlap") {
  const OrientedRect r{{0, 0}, {1, 0.5}, 0.0};
  CHECK(point_in_rect({0.9, 0.4}, r));
  CHECK_FALSE(point_in_rect({1.1, 0}, r));
  CHECK(point_rect_distance({2, 0}, r) == doctest::Approx(1.0));
  CHECK(rect_rect_distance(r, {{1.5, 0}, {0.6, 0.6}, 0.3}) == 0.0);
  CHECK(rect_rect_distance(r, {{4, 0}, {1, 1}, 0.0}) == doctest::Approx(2.0));
  CHECK(circle_circle_distance({{0, 0}, 1}, {{3, 0}, 1}) == doctest::Approx(1.0));
  CHECK(circle_circle_distance({{0, 0}, 1}, {{1, 0}, 1}) == 0.0);
  CHECK(segment_circle_distance({{-2, 2}, {2, 2}}, {{0, 0}, 1}) == doctest::Approx(1.0));
  CHECK(segment_rect_distance({{-2, 2}, {2, 2}}, r) == doctest::Approx(1.5));
}
