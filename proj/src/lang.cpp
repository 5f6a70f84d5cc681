#include "procnav/lang.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

namespace procnav {

// ---------------------------------------------------------------------------
// Descriptions

AreaDescription describe_area(const WorldState& w, int area) {
  const Area& a = w.areas.at(area);
  AreaDescription d;
  d.area_index = area + 1;

  auto order = [](const std::vector<Color>& declared) {
    std::vector<Color> out = declared;
    for (Color c : kPalette)
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    return out;
  };
  for (Color c : order(a.ball_order)) {
    const int n = static_cast<int>(std::count_if(w.balls.begin(), w.balls.end(), [&](const Ball& b) {
      return b.color == c && a.bounds.contains(b.position);
    }));
    if (n > 0) d.items.push_back({n, c, ItemKind::Ball});
  }
  for (Color c : order(a.zone_order)) {
    const int n = static_cast<int>(std::count_if(w.zones.begin(), w.zones.end(), [&](const Zone& z) {
      return z.color == c && z.area == area;
    }));
    if (n > 0) d.items.push_back({n, c, ItemKind::Zone});
  }
  d.obstacle_count = static_cast<int>(std::count_if(
      w.obstacles.begin(), w.obstacles.end(), [&](const Obstacle& o) { return o.area == area; }));
  return d;
}

std::string render_area_description(const AreaDescription& d) {
  std::string s = "Area " + std::to_string(d.area_index) + " has ";
  for (const auto& item : d.items) {
    s += std::to_string(item.count) + " " + std::string(to_string(item.color)) + " ";
    s += item.kind == ItemKind::Ball ? "Ball" : "Zone";
    if (item.count != 1) s += "s";
    s += ", ";
  }
  s += std::to_string(d.obstacle_count) + (d.obstacle_count == 1 ? " obstacle." : " obstacles.");
  return s;
}

std::string render_area_description(const WorldState& w, int area) {
  return render_area_description(describe_area(w, area));
}

std::string render_environment_description(const WorldState& w) {
  std::string s = "Received areas information:";
  for (std::size_t i = 0; i < w.areas.size(); ++i)
    s += " " + render_area_description(w, static_cast<int>(i));
  return s;
}

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text, std::size_t pos = 0) : text_(text), pos_(pos) {}

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  std::string_view rest() const { return text_.substr(std::min(pos_, text_.size())); }

  bool consume(std::string_view lit) {
    if (rest().substr(0, lit.size()) != lit) return false;
    pos_ += lit.size();
    return true;
  }
  void skip_ws() {
    while (!done() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  std::string_view take_while(bool (*pred)(unsigned char)) {
    const std::size_t start = pos_;
    while (!done() && pred(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::string_view text_;
  std::size_t pos_;
};

bool is_digit(unsigned char c) { return std::isdigit(c) != 0; }
bool is_alpha(unsigned char c) { return std::isalpha(c) != 0; }
bool is_ident_start(unsigned char c) { return std::isalpha(c) != 0 || c == '_'; }
bool is_ident(unsigned char c) { return std::isalnum(c) != 0 || c == '_'; }

AreaDescription parse_area_at(Cursor& cur) {
  auto fail = [&](const std::string& what) { throw DescriptionError(what, cur.pos()); };
  auto number = [&]() {
    const auto digits = cur.take_while(is_digit);
    if (digits.empty() || digits.size() > 9) fail("expected a count");
    int n = 0;
    std::from_chars(digits.data(), digits.data() + digits.size(), n);
    return n;
  };
  AreaDescription d;
  if (!cur.consume("Area ")) fail("expected 'Area '");
  d.area_index = number();
  if (!cur.consume(" has ")) fail("expected ' has '");
  while (true) {
    const int n = number();
    if (cur.consume(" obstacles.") || cur.consume(" obstacle.")) {
      d.obstacle_count = n;
      return d;
    }
    if (!cur.consume(" ")) fail("expected ' '");
    const std::size_t color_at = cur.pos();
    const auto word = cur.take_while(is_alpha);
    const auto color = parse_color(word);
    if (!color) throw DescriptionError("unknown color '" + std::string(word) + "'", color_at);
    DescriptionItem item{n, *color, ItemKind::Ball};
    if (cur.consume(" Balls") || cur.consume(" Ball")) {
      item.kind = ItemKind::Ball;
    } else if (cur.consume(" Zones") || cur.consume(" Zone")) {
      item.kind = ItemKind::Zone;
    } else {
      fail("expected Ball or Zone");
    }
    d.items.push_back(item);
    if (!cur.consume(", ")) fail("expected ', '");
  }
}

}  // namespace

AreaDescription parse_area_description(std::string_view text) {
  Cursor cur(text);
  auto d = parse_area_at(cur);
  if (!cur.done()) throw DescriptionError("trailing text", cur.pos());
  return d;
}

std::vector<AreaDescription> parse_environment_description(std::string_view text) {
  Cursor cur(text);
  if (!cur.consume("Received areas information:"))
    throw DescriptionError("expected 'Received areas information:'", 0);
  std::vector<AreaDescription> out;
  while (cur.consume(" ")) out.push_back(parse_area_at(cur));
  if (!cur.done()) throw DescriptionError("trailing text", cur.pos());
  return out;
}

// ---------------------------------------------------------------------------
// Plans

namespace {

struct PrimitiveInfo {
  Primitive p;
  std::string_view name;
  int arity;
};

constexpr std::array<PrimitiveInfo, 5> kPrimitives = {{
    {Primitive::SearchBall, "search_ball", 1},
    {Primitive::CatchTheBall, "catch_the_ball", 1},
    {Primitive::SearchZone, "search_zone", 1},
    {Primitive::GoToZone, "go_to_zone", 1},
    {Primitive::LeaveBall, "leave_ball", 0},
}};

struct QuotePair {
  std::string_view open;
  std::array<std::string_view, 2> close;
};

// Longer openers first so "``" wins over "`".
constexpr std::array<QuotePair, 6> kQuotes = {{
    {"``", {"''", "\""}},
    {"`", {"'", "`"}},
    {"'", {"'", "'"}},
    {"\"", {"\"", "\""}},
    {"\xE2\x80\x98", {"\xE2\x80\x99", "\xE2\x80\x99"}},  // ‘ ’
    {"\xE2\x80\x9C", {"\xE2\x80\x9D", "\xE2\x80\x9D"}},  // “ ”
}};

bool is_quote_byte(unsigned char c) { return c == '\'' || c == '"' || c == '`' || c == 0xE2; }

}  // namespace

std::string_view to_string(Primitive p) {
  for (const auto& info : kPrimitives)
    if (info.p == p) return info.name;
  return "?";
}

std::optional<Primitive> parse_primitive(std::string_view name) {
  for (const auto& info : kPrimitives)
    if (info.name == name) return info.p;
  return std::nullopt;
}

int arity(Primitive p) {
  for (const auto& info : kPrimitives)
    if (info.p == p) return info.arity;
  return 0;
}

bool targets_ball(Primitive p) { return p == Primitive::SearchBall || p == Primitive::CatchTheBall; }
bool targets_zone(Primitive p) { return p == Primitive::SearchZone || p == Primitive::GoToZone; }

std::string_view to_string(PlanError::Kind k) {
  switch (k) {
    case PlanError::Kind::UnknownPrimitive: return "UnknownPrimitive";
    case PlanError::Kind::ArityMismatch: return "ArityMismatch";
    case PlanError::Kind::UnknownColor: return "UnknownColor";
    case PlanError::Kind::SyntaxError: return "SyntaxError";
    case PlanError::Kind::EmptyPlan: return "EmptyPlan";
  }
  return "?";
}

PlanError::PlanError(Kind kind, std::size_t offset, std::string token, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " at byte " + std::to_string(offset) + ": " +
                         message),
      kind_(kind),
      offset_(offset),
      token_(std::move(token)) {}

namespace {

using PK = PlanError::Kind;

Color parse_quoted_color(Cursor& cur) {
  const std::size_t start = cur.pos();
  const QuotePair* pair = nullptr;
  for (const auto& q : kQuotes) {
    if (cur.consume(q.open)) {
      pair = &q;
      break;
    }
  }
  if (!pair) throw PlanError(PK::SyntaxError, start, "", "expected a quoted color");
  const std::size_t body = cur.pos();
  while (!cur.done()) {
    for (const auto& close : pair->close) {
      if (cur.rest().substr(0, close.size()) == close) {
        const std::string word(cur.rest().data() - (cur.pos() - body), cur.pos() - body);
        cur.advance(close.size());
        const auto color = parse_color(word);
        if (!color) throw PlanError(PK::UnknownColor, body, word, "unknown color '" + word + "'");
        return *color;
      }
    }
    const auto c = static_cast<unsigned char>(cur.peek());
    if (c == '\n' || c == ')' || c == ';' || (is_quote_byte(c) && c != 0xE2)) break;
    cur.advance(1);
  }
  throw PlanError(PK::SyntaxError, start, "", "unterminated quoted argument");
}

PrimitiveCall parse_call(Cursor& cur) {
  const std::size_t start = cur.pos();
  if (!is_ident_start(static_cast<unsigned char>(cur.peek())))
    throw PlanError(PK::SyntaxError, start, "", "expected a primitive name");
  const std::string ident(cur.take_while(is_ident));
  cur.skip_ws();
  if (!cur.consume("("))
    throw PlanError(PK::SyntaxError, cur.pos(), ident, "expected '(' after " + ident);
  const auto prim = parse_primitive(ident);
  if (!prim) throw PlanError(PK::UnknownPrimitive, start, ident, "unknown primitive '" + ident + "'");

  PrimitiveCall call{*prim, {}};
  cur.skip_ws();
  if (!cur.consume(")")) {
    while (true) {
      call.args.push_back(parse_quoted_color(cur));
      cur.skip_ws();
      if (cur.consume(")")) break;
      if (!cur.consume(","))
        throw PlanError(PK::SyntaxError, cur.pos(), ident, "expected ')' or ','");
      cur.skip_ws();
    }
  }
  if (static_cast<int>(call.args.size()) != arity(*prim))
    throw PlanError(PK::ArityMismatch, start, ident,
                    ident + " takes " + std::to_string(arity(*prim)) + " argument(s), got " +
                        std::to_string(call.args.size()));
  return call;
}

}  // namespace

Plan parse_plan(std::string_view text) {
  Plan plan;
  plan.source_text = std::string(text);
  Cursor cur(text);
  cur.skip_ws();
  if (cur.done()) throw PlanError(PK::EmptyPlan, 0, "", "plan is empty");
  while (true) {
    plan.calls.push_back(parse_call(cur));
    cur.skip_ws();
    if (cur.done()) break;
    if (!cur.consume(";")) throw PlanError(PK::SyntaxError, cur.pos(), "", "expected ';'");
    cur.skip_ws();
    if (cur.done()) break;
  }
  return plan;
}

std::string render_call(const PrimitiveCall& call) {
  std::string s(to_string(call.name));
  s += "(";
  for (std::size_t i = 0; i < call.args.size(); ++i) {
    if (i > 0) s += ", ";
    s += "'" + std::string(to_string(call.args[i])) + "'";
  }
  s += ")";
  return s;
}

std::string render_plan(const Plan& plan) {
  std::string s;
  for (std::size_t i = 0; i < plan.calls.size(); ++i) {
    if (i > 0) s += " ";
    s += render_call(plan.calls[i]) + ";";
  }
  return s;
}

std::string ValidationReport::summary() const {
  std::string s;
  for (const auto& e : errors) s += "error: call " + std::to_string(e.call_index + 1) + ": " + e.message + "\n";
  for (const auto& w : warnings)
    s += "warning: call " + std::to_string(w.call_index + 1) + ": " + w.message + "\n";
  return s;
}

ValidationReport validate_plan(const Plan& plan, const WorldState& world) {
  ValidationReport report;
  std::vector<Color> searched;
  bool holding = false;  // a catch not yet consumed by leave_ball
  bool went_to_zone = false;
  for (std::size_t i = 0; i < plan.calls.size(); ++i) {
    const auto& call = plan.calls[i];
    if (static_cast<int>(call.args.size()) != arity(call.name)) {
      report.errors.push_back({i, "wrong number of arguments"});
      continue;
    }
    if (targets_ball(call.name)) {
      const Color c = call.args[0];
      const bool exists = std::any_of(world.balls.begin(), world.balls.end(),
                                      [&](const Ball& b) { return b.color == c; });
      if (!exists) report.errors.push_back({i, "unknown ball color " + std::string(to_string(c))});
    }
    if (targets_zone(call.name)) {
      const Color c = call.args[0];
      const bool exists = std::any_of(world.zones.begin(), world.zones.end(),
                                      [&](const Zone& z) { return z.color == c; });
      if (!exists) report.errors.push_back({i, "unknown zone color " + std::string(to_string(c))});
    }
    switch (call.name) {
      case Primitive::SearchBall:
        searched.push_back(call.args[0]);
        break;
      case Primitive::CatchTheBall:
        if (std::find(searched.begin(), searched.end(), call.args[0]) == searched.end())
          report.warnings.push_back(
              {i, "catch without preceding search for " + std::string(to_string(call.args[0]))});
        holding = true;
        went_to_zone = false;
        break;
      case Primitive::GoToZone:
        went_to_zone = true;
        break;
      case Primitive::LeaveBall:
        if (!holding) report.warnings.push_back({i, "leave_ball without a preceding catch"});
        if (!went_to_zone) report.warnings.push_back({i, "leave_ball without a preceding go_to_zone"});
        holding = false;
        break;
      case Primitive::SearchZone:
        break;
    }
  }
  return report;
}

}  // namespace procnav
