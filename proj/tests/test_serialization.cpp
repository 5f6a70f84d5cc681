#include <doctest.h>

#include <cstdio>

#include "oracles.hpp"
#include "procnav/serialization.hpp"

using namespace procnav;

TEST_CASE("spec round trip keeps color order") {
  const auto j = Json::parse(oracle::fixture("golden_world_spec.json"));
  const auto spec = spec_from_json(j);
  REQUIRE(spec.areas.size() == 1);
  REQUIRE(spec.areas[0].zones.size() == 2);
  CHECK(spec.areas[0].zones[0].first == Color::Red);
  CHECK(spec.areas[0].zones[1].first == Color::Green);
  const auto again = spec_from_json(to_json(spec));
  CHECK(to_json(again).dump() == to_json(spec).dump());
}

TEST_CASE("malformed specs") {
  CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"areas": [{"width": 5}]})")), GenerationError);
  CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"areas": [{"width": 5, "height": "x"}]})")), GenerationError);
  CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"areas": [{"width": 5, "height": 5, "balls": {"Teal": 1}}]})")),
                  GenerationError);
  CHECK_THROWS_AS(spec_from_json(Json::parse(R"([1,2])")), GenerationError);
}

TEST_CASE("world round trip is lossless") {
  const auto spec = spec_from_json(Json::parse(oracle::fixture("golden_world_spec.json")));
  auto w = generate_environment(spec);
  w.balls[0].carried_by = 0;
  w.agents[0].carried_ball = 0;
  w.clock.advance();
  const Json j = to_json(w);
  const WorldState back = world_from_json(j);
  CHECK(to_json(back).dump() == j.dump());
  CHECK(back.layout == w.layout);
  CHECK(back.clock.tick() == 1);
  CHECK(back.agents[0].pose == w.agents[0].pose);
  CHECK_THROWS_AS(world_from_json(Json::parse(R"({"seed": 1})")), std::invalid_argument);
}

TEST_CASE("event json") {
  const Event e{EventKind::Drop, 12, 0, 3, 1, "inside_zone"};
  CHECK(to_json(e).dump() == R"({"kind":"drop","tick":12,"agent":0,"ball":3,"zone":1,"detail":"inside_zone"})");
}

TEST_CASE("files") {
  const std::string path = "serialization_test_file.txt";
  write_file(path, "hello\n");
  CHECK(read_file(path) == "hello\n");
  write_file(path, "again");
  CHECK(read_file(path) == "again");
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_file("/nonexistent/dir/file"), std::runtime_error);
}
