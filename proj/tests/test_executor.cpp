#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "procnav/executor.hpp"
#include "procnav/serialization.hpp"

using namespace procnav;

namespace {

WorldState golden_world(std::uint64_t seed = 7) {
  auto spec = spec_from_json(Json::parse(oracle::fixture("golden_world_spec.json")));
  spec.seed = seed;
  return generate_environment(spec);
}

const char* kFetch =
    "search_ball('Orange'); catch_the_ball('Orange'); search_zone('Green'); go_to_zone('Green'); leave_ball();";

}  // namespace

TEST_CASE("A* matches BFS shortest paths") {
  std::mt19937 gen(21);
  int solved = 0, blocked = 0;
  while (solved < 60) {
    const auto g = oracle::random_grid(gen, 14, 11, 0.28);
    const auto a = oracle::random_free_cell(gen, g), b = oracle::random_free_cell(gen, g);
    const auto expect = oracle::bfs_distance(g, a, b);
    if (!expect) {
      CHECK_THROWS_AS(plan_path(g, g.center(a), g.center(b)), NoPathError);
      ++blocked;
      continue;
    }
    const auto p = plan_path(g, g.center(a), g.center(b));
    REQUIRE(!p.cells.empty());
    CHECK(static_cast<int>(p.cells.size()) - 1 == *expect);
    CHECK(p.cells.front() == a);
    CHECK(p.cells.back() == b);
    for (std::size_t i = 1; i < p.cells.size(); ++i) {
      CHECK(std::abs(p.cells[i].x - p.cells[i - 1].x) + std::abs(p.cells[i].y - p.cells[i - 1].y) == 1);
      CHECK_FALSE(g.blocked(p.cells[i]));
    }
    ++solved;
  }
  CHECK(blocked > 0);
}

TEST_CASE("plan_path edge cases") {
  std::mt19937 gen(1);
  auto g = oracle::random_grid(gen, 5, 5, 0.0);
  const auto p = plan_path(g, {0.5, 0.5}, {4.2, 4.7});
  CHECK(p.waypoints.back() == Vec2{4.2, 4.7});
  CHECK(p.cells.size() == 9);
  CHECK(path_remaining(p, {0.5, 0.5}) == doctest::Approx(p.total_length));
  CHECK(path_progress(p, p.waypoints.back()) == doctest::Approx(p.total_length));
  CHECK_THROWS_AS(plan_path(g, {-1, 0}, {1, 1}), std::invalid_argument);

  // Start inside a blocked cell is moved to a free neighbor.
  g.at({0, 0}) = CellKind::Obstacle;
  const auto q = plan_path(g, {0.5, 0.5}, {2.5, 0.5});
  CHECK_FALSE(g.blocked(q.cells.front()));
}

TEST_CASE("follower steers toward the path") {
  PathPlan p;
  p.waypoints = {{0, 0}, {5, 0}};
  p.total_length = 5;
  const Twist straight = follow_path({0, 0, 0}, p);
  CHECK(straight.linear > 0.9);
  CHECK(std::abs(straight.angular) < 1e-9);
  const Twist left = follow_path({1, -0.5, 0}, p);
  CHECK(left.angular > 0);
  const Twist behind = follow_path({1, 0, std::numbers::pi}, p);
  CHECK(behind.linear == 0.0);
  CHECK(follow_path({4.95, 0, 0}, p) == Twist{});
}

TEST_CASE("fetch and deliver on the golden world") {
  WorldState w = golden_world();
  const auto trace = run_plan(parse_plan(kFetch), w);
  CHECK(trace.completed());
  CHECK(trace.ticks_used <= 5000);
  REQUIRE(trace.calls.size() == 5);
  for (const auto& c : trace.calls) CHECK(c.phase == Phase::Done);
  const Ball& ball = w.balls[0];
  CHECK_FALSE(ball.carried_by);
  bool in_green = false;
  for (const auto& z : w.zones)
    if (z.color == Color::Green) in_green |= oracle::in_circle(ball.position, z.center, z.radius);
  CHECK(in_green);
}

TEST_CASE("behavior failures are recorded, not thrown") {
  SUBCASE("catch before search") {
    WorldState w = golden_world();
    const auto t = run_plan(parse_plan("catch_the_ball('Orange');"), w);
    CHECK_FALSE(t.completed());
    CHECK(t.calls.back().reason == "CatchBeforeLocalization");
  }
  SUBCASE("leave without carrying") {
    WorldState w = golden_world();
    const auto t = run_plan(parse_plan("leave_ball(); search_ball('Orange');"), w);
    REQUIRE(t.calls.size() == 1);
    CHECK(t.calls[0].reason == "NotCarrying");
  }
  SUBCASE("missing ball color") {
    WorldState w = golden_world();
    const auto t = run_plan(parse_plan("search_ball('Blue');"), w);
    CHECK(t.calls.back().phase == Phase::Failed);
    CHECK(t.calls.back().reason.rfind("NotFound", 0) == 0);
  }
  SUBCASE("tiny budget") {
    WorldState w = golden_world();
    ExecutorOptions opt;
    opt.step_budget = 3;
    const auto t = run_plan(parse_plan(kFetch), w, 0, opt);
    CHECK(t.calls.back().reason == "StepBudgetExhausted");
  }
}

TEST_CASE("runner keeps a tick log") {
  WorldState w = golden_world(9);
  const auto trace = run_plan(parse_plan("search_ball('Orange');"), w);
  REQUIRE(!trace.ticks.empty());
  for (std::size_t i = 1; i < trace.ticks.size(); ++i) CHECK(trace.ticks[i].tick == trace.ticks[i - 1].tick + 1);
}
