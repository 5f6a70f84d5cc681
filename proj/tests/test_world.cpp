#include <doctest.h>

#include "procnav/world.hpp"

using namespace procnav;

namespace {

// A 6 m square room with one circular obstacle, one zone and one ball.
WorldState room() {
  WorldState w;
  w.clock = SimClock(0.05);
  w.walls = {{{0, 0}, {6, 0}}, {{6, 0}, {6, 6}}, {{6, 6}, {0, 6}}, {{0, 6}, {0, 0}}};
  Obstacle o;
  o.shape = Obstacle::Shape::Circle;
  o.center = {4, 1};
  o.radius = 0.5;
  w.obstacles.push_back(o);
  w.zones.push_back({0, Color::Green, {1.5, 4.5}, 0.5, 0});
  w.balls.push_back({0, Color::Orange, {1.5, 1.5}, 0.1, std::nullopt});
  w.agents.push_back({0, {1.5, 1.5, 0.0}, std::nullopt, 0, {}});
  return w;
}

}  // namespace

TEST_CASE("free motion and clamping") {
  WorldState w = room();
  auto ev = advance_world(w, {{0, {0.5, 0.0}}});
  CHECK(ev.empty());
  CHECK(w.agents[0].pose.x == doctest::Approx(1.525));
  CHECK(w.clock.tick() == 1);

  ev = advance_world(w, {{0, {5.0, 0.0}}});
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].kind == EventKind::Clamp);
  CHECK(w.agents[0].velocity.linear == 1.0);
}

TEST_CASE("collisions stop the agent") {
  WorldState w = room();
  w.agents[0].pose = {5.65, 3.0, 0.0};
  const Pose before = w.agents[0].pose;
  auto ev = advance_world(w, {{0, {1.0, 0.0}}});
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].kind == EventKind::Collision);
  CHECK(w.agents[0].pose == before);
  CHECK(w.agents[0].velocity == Twist{});

  w.agents[0].pose = {3.2, 1.0, 0.0};
  ev = advance_world(w, {{0, {1.0, 0.0}}});
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].kind == EventKind::Collision);
  CHECK(disc_in_collision(w, {4.0, 1.6}));
  CHECK_FALSE(disc_in_collision(w, {3.0, 3.0}));
}

TEST_CASE("pickup, carry and drop inside a zone") {
  WorldState w = room();
  const Mutation pick{Mutation::Kind::Pickup, 0, 0};
  auto ev = advance_world(w, {}, std::span(&pick, 1));
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].kind == EventKind::Pickup);
  CHECK(w.balls[0].carried_by == 0);
  CHECK_THROWS_AS(advance_world(w, {}, std::span(&pick, 1)), std::invalid_argument);

  w.agents[0].pose = {1.5, 3.9, std::numbers::pi / 2};
  bool entered = false;
  for (int i = 0; i < 20; ++i)
    for (const auto& e : advance_world(w, {{0, {0.5, 0.0}}})) entered |= e.kind == EventKind::ZoneEnter;
  CHECK(entered);
  CHECK(w.balls[0].position.y == doctest::Approx(w.agents[0].pose.y));

  const Mutation drop{Mutation::Kind::Drop, 0, -1};
  ev = advance_world(w, {}, std::span(&drop, 1));
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].kind == EventKind::Drop);
  CHECK(ev[0].detail == "inside_zone");
  CHECK(ev[0].zone == 0);
  CHECK_FALSE(w.balls[0].carried_by);
}

TEST_CASE("drop outside a zone is recorded") {
  WorldState w = room();
  const Mutation muts[] = {{Mutation::Kind::Pickup, 0, 0}, {Mutation::Kind::Drop, 0, -1}};
  const auto ev = advance_world(w, {}, muts);
  REQUIRE(ev.size() == 2);
  CHECK(ev[1].detail == "dropped_outside_zone");
}

TEST_CASE("unknown agents and dt mismatch") {
  WorldState w = room();
  CHECK_THROWS_AS(advance_world(w, {{7, {}}}), UnknownAgentError);
  CHECK_THROWS_AS(w.agent(3), UnknownAgentError);
  CHECK_THROWS_AS(step_world(w, {}, 0.1), std::invalid_argument);
  const auto r = step_world(w, {{0, {0.2, 0.1}}}, 0.05);
  CHECK(w.clock.tick() == 0);
  CHECK(r.world.clock.tick() == 1);
}

TEST_CASE("two agents cannot pass through each other") {
  WorldState w = room();
  w.agents.push_back({1, {2.2, 1.5, std::numbers::pi}, std::nullopt, 0, {}});
  int collisions = 0;
  for (int i = 0; i < 40; ++i)
    for (const auto& e : advance_world(w, {{0, {1.0, 0.0}}, {1, {1.0, 0.0}}}))
      collisions += e.kind == EventKind::Collision;
  CHECK(collisions > 0);
  CHECK(distance({w.agents[0].pose.x, w.agents[0].pose.y}, {w.agents[1].pose.x, w.agents[1].pose.y}) >=
        2 * w.params.robot_radius - 1e-9);
}

TEST_CASE("color and kind names") {
  CHECK(parse_color("orange") == Color::Orange);
  CHECK(parse_color("GREEN") == Color::Green);
  CHECK_FALSE(parse_color("teal"));
  CHECK(to_string(Color::Purple) == "Purple");
  CHECK(to_string(EventKind::ZoneEnter) == "zone_enter");
}
