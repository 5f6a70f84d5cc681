#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "procnav/lang.hpp"
#include "procnav/procgen.hpp"
#include "procnav/serialization.hpp"

using namespace procnav;

namespace {

const char* kBacktickCalls =
    "search_ball(`Orange'); catch_the_ball(`Orange'); search_zone(`Green'); go_to_zone(`Green'); leave_ball();";

Plan fetch(Color ball, Color zone) {
  Plan p;
  p.calls = {{Primitive::SearchBall, {ball}},
             {Primitive::CatchTheBall, {ball}},
             {Primitive::SearchZone, {zone}},
             {Primitive::GoToZone, {zone}},
             {Primitive::LeaveBall, {}}};
  return p;
}

PlanError::Kind error_kind(std::string_view text) {
  try {
    parse_plan(text);
  } catch (const PlanError& e) {
    return e.kind();
  }
  FAIL("no error for: " << text);
  return PlanError::Kind::SyntaxError;
}

}  // namespace

TEST_CASE("golden description") {
  const auto w = generate_environment(spec_from_json(Json::parse(oracle::fixture("golden_world_spec.json"))));
  CHECK(render_area_description(w, 0) == "Area 1 has 1 Orange Ball, 1 Red Zone, 1 Green Zone, 5 obstacles.");
  CHECK(render_environment_description(w) ==
        "Received areas information: Area 1 has 1 Orange Ball, 1 Red Zone, 1 Green Zone, 5 obstacles.");
}

TEST_CASE("description grammar") {
  const AreaDescription d{2, {{2, Color::Blue, ItemKind::Ball}, {1, Color::Yellow, ItemKind::Zone}}, 1};
  const auto text = render_area_description(d);
  CHECK(text == "Area 2 has 2 Blue Balls, 1 Yellow Zone, 1 obstacle.");
  CHECK(parse_area_description(text) == d);
  const AreaDescription bare{1, {}, 0};
  CHECK(parse_area_description(render_area_description(bare)) == bare);

  const auto multi = parse_environment_description(
      "Received areas information: Area 1 has 1 Orange Ball, 1 Red Zone, 1 Green Zone, 5 obstacles. "
      "Area 2 has 2 Blue Balls, 1 Yellow Zone, 1 obstacle.");
  REQUIRE(multi.size() == 2);
  CHECK(multi[1] == d);
  CHECK(multi[0].obstacle_count == 5);

  CHECK_THROWS_AS(parse_area_description("Area 1 has 1 Teal Ball, 2 obstacles."), DescriptionError);
  CHECK_THROWS_AS(parse_area_description("Area one has nothing"), DescriptionError);
}

TEST_CASE("the published call line parses") {
  const Plan p = parse_plan(kBacktickCalls);
  CHECK(p == fetch(Color::Orange, Color::Green));
  CHECK(p.source_text == kBacktickCalls);
  CHECK(render_plan(p) ==
        "search_ball('Orange'); catch_the_ball('Orange'); search_zone('Green'); go_to_zone('Green'); leave_ball();");
}

TEST_CASE("accepted quote styles") {
  for (const char* text : {"search_ball('Red')", "search_ball(\"Red\")", "search_ball(`Red')", "search_ball(`Red`)",
                           "search_ball(``Red'')", "search_ball(``Red\")", "search_ball(‘Red’)",
                           "search_ball(“Red”)", "  search_ball ( 'red' ) ;  "}) {
    const Plan p = parse_plan(text);
    REQUIRE(p.calls.size() == 1);
    CHECK(p.calls[0] == PrimitiveCall{Primitive::SearchBall, {Color::Red}});
  }
}

TEST_CASE("typed errors") {
  CHECK(error_kind("") == PlanError::Kind::EmptyPlan);
  CHECK(error_kind("  ; ") == PlanError::Kind::SyntaxError);
  CHECK(error_kind("fly('Red')") == PlanError::Kind::UnknownPrimitive);
  CHECK(error_kind("leave_ball('Red')") == PlanError::Kind::ArityMismatch);
  CHECK(error_kind("search_ball()") == PlanError::Kind::ArityMismatch);
  CHECK(error_kind("search_ball('Red', 'Blue')") == PlanError::Kind::ArityMismatch);
  CHECK(error_kind("search_ball('Teal')") == PlanError::Kind::UnknownColor);
  CHECK(error_kind("search_ball(Red)") == PlanError::Kind::SyntaxError);
  CHECK(error_kind("search_ball('Red') leave_ball()") == PlanError::Kind::SyntaxError);
  CHECK(error_kind("search_ball('Red") == PlanError::Kind::SyntaxError);

  try {
    parse_plan("search_ball('Red'); hop()");
  } catch (const PlanError& e) {
    CHECK(e.offset() == 20);
    CHECK(e.token() == "hop");
  }
}

TEST_CASE("render then parse is the identity") {
  std::mt19937 gen(11);
  for (int i = 0; i < 300; ++i) {
    Plan p;
    const int n = 1 + static_cast<int>(gen() % 8);
    for (int k = 0; k < n; ++k) {
      const auto prim = static_cast<Primitive>(gen() % 5);
      PrimitiveCall c{prim, {}};
      for (int a = 0; a < arity(prim); ++a) c.args.push_back(kPalette[gen() % kPalette.size()]);
      p.calls.push_back(c);
    }
    CHECK(parse_plan(render_plan(p)) == p);
  }
}

TEST_CASE("fuzzed input only raises PlanError") {
  std::mt19937 gen(12);
  const std::string seed_text = kBacktickCalls;
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz_();'\"` ,\n\t\\";
  int ok = 0, typed = 0;
  for (int i = 0; i < 2000; ++i) {
    std::string s = seed_text;
    const int edits = 1 + static_cast<int>(gen() % 6);
    for (int e = 0; e < edits && !s.empty(); ++e) {
      const std::size_t pos = gen() % s.size();
      switch (gen() % 3) {
        case 0: s[pos] = alphabet[gen() % alphabet.size()]; break;
        case 1: s.erase(pos, 1 + gen() % 4); break;
        default: s.insert(pos, 1, static_cast<char>(gen() % 256)); break;
      }
    }
    try {
      parse_plan(s);
      ++ok;
    } catch (const PlanError&) {
      ++typed;
    }
  }
  CHECK(ok + typed == 2000);
  CHECK(typed > 0);
}

TEST_CASE("validation against a world") {
  const auto w = generate_environment(spec_from_json(Json::parse(oracle::fixture("golden_world_spec.json"))));
  CHECK(validate_plan(fetch(Color::Orange, Color::Green), w).ok());
  CHECK(validate_plan(fetch(Color::Orange, Color::Green), w).warnings.empty());

  const auto bad = validate_plan(fetch(Color::Purple, Color::Green), w);
  CHECK_FALSE(bad.ok());
  CHECK(bad.errors.size() == 2);

  const auto odd = validate_plan(parse_plan("leave_ball();"), w);
  CHECK(odd.ok());
  CHECK_FALSE(odd.warnings.empty());
}
