#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "procnav/planner.hpp"

#include <httplib.h>

#include <cctype>
#include <cstdlib>
#include <regex>
#include <sstream>

namespace procnav {

std::string_view to_string(PlannerError::Kind k) {
  switch (k) {
    case PlannerError::Kind::NoCallsFound: return "NoCallsFound";
    case PlannerError::Kind::BadCommand: return "BadCommand";
    case PlannerError::Kind::UnknownColor: return "UnknownColor";
    case PlannerError::Kind::ParseFailed: return "ParseFailed";
    case PlannerError::Kind::ValidationFailed: return "ValidationFailed";
    case PlannerError::Kind::Timeout: return "Timeout";
    case PlannerError::Kind::HTTPError: return "HTTPError";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Prompt

std::string_view capability_list() {
  return "Available functions. Colors are passed as quoted names, for example 'Red'.\n"
         "- search_ball(color): look around until a ball of that color is located\n"
         "- catch_the_ball(color): drive to a located ball and pick it up\n"
         "- search_zone(color): locate a zone of that color\n"
         "- go_to_zone(color): drive into a located zone\n"
         "- leave_ball(): put down the ball being carried\n"
         "Colors: Red, Green, Blue, Orange, Yellow, Purple.\n";
}

std::string build_prompt(const PromptContext& ctx) {
  if (ctx.command.empty()) throw std::invalid_argument("build_prompt: empty command");
  std::ostringstream os;
  os << "## Environment\n"
     << (ctx.description.empty() ? std::string("(no areas reported)") : ctx.description) << "\n\n"
     << "## Capabilities\n"
     << capability_list() << "\n"
     << "## Output format\n"
     << "Answer in three labeled parts:\n"
     << "Reasoning: a numbered list of the steps you will take.\n"
     << "Response: one sentence for the operator.\n"
     << "Tasks to be executed: the function calls on a single final line, separated by semicolons, "
        "e.g. search_ball('Red'); catch_the_ball('Red'); leave_ball();\n\n"
     << "## Command\n"
     << ctx.command << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string unescape_underscores(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size() && s[i + 1] == '_') continue;
    out.push_back(s[i]);
  }
  return out;
}

// Length of an `ident ws* ( ... )` call starting at i, or 0.
std::size_t match_call(std::string_view s, std::size_t i) {
  if (i >= s.size() || !ident_start(s[i])) return 0;
  std::size_t j = i;
  while (j < s.size() && ident_char(s[j])) ++j;
  while (j < s.size() && (s[j] == ' ' || s[j] == '\t')) ++j;
  if (j >= s.size() || s[j] != '(') return 0;
  const std::size_t close = s.find_first_of(")\n", j + 1);
  if (close == std::string_view::npos || s[close] != ')') return 0;
  return close + 1 - i;
}

std::size_t skip_space(std::string_view s, std::size_t i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return i;
}

}  // namespace

std::string extract_calls(std::string_view raw) {
  const std::string text = unescape_underscores(raw);
  const std::string_view s = text;
  std::size_t best_begin = 0, best_end = 0, best_count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!ident_start(s[i]) || (i > 0 && ident_char(s[i - 1]))) continue;
    std::size_t len = match_call(s, i);
    if (!len) continue;
    std::size_t end = i + len;
    std::size_t count = 1;
    while (true) {
      const std::size_t semi = skip_space(s, end);
      if (semi >= s.size() || s[semi] != ';') break;
      end = semi + 1;
      const std::size_t next = skip_space(s, end);
      const std::size_t n = match_call(s, next);
      if (!n) break;
      end = next + n;
      ++count;
    }
    if (count >= best_count) {
      best_begin = i;
      best_end = end;
      best_count = count;
    }
    i = end - 1;
  }
  if (best_count == 0) throw PlannerError(PlannerError::Kind::NoCallsFound, "no function calls found in the text");
  return std::string(s.substr(best_begin, best_end - best_begin));
}

// ---------------------------------------------------------------------------
// Stub planner

ParsedCommand parse_command(std::string_view command) {
  std::vector<Color> colors;
  std::size_t i = 0;
  while (i < command.size() && colors.size() < 2) {
    if (!std::isalpha(static_cast<unsigned char>(command[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < command.size() && std::isalpha(static_cast<unsigned char>(command[j]))) ++j;
    if (const auto c = parse_color(command.substr(i, j - i))) colors.push_back(*c);
    i = j;
  }
  if (colors.size() < 2)
    throw PlannerError(PlannerError::Kind::BadCommand,
                       "command must name a ball color and then a zone color: '" + std::string(command) + "'");
  return {colors[0], colors[1]};
}

Json to_json(const PlannerResponse& r) {
  Json j;
  j["reasoning"] = r.reasoning;
  j["answer"] = r.answer;
  j["call_text"] = r.call_text;
  j["calls"] = Json::array();
  for (const auto& c : r.plan.calls) j["calls"].push_back(render_call(c));
  return j;
}

PlannerResponse stub_plan(const WorldState& world, const ParsedCommand& command) {
  const std::string ball(to_string(command.ball));
  const std::string zone(to_string(command.zone));
  const bool has_ball = std::any_of(world.balls.begin(), world.balls.end(),
                                    [&](const Ball& b) { return b.color == command.ball; });
  if (!has_ball) throw PlannerError(PlannerError::Kind::UnknownColor, "no " + ball + " ball in the world");
  const bool has_zone = std::any_of(world.zones.begin(), world.zones.end(),
                                    [&](const Zone& z) { return z.color == command.zone; });
  if (!has_zone) throw PlannerError(PlannerError::Kind::UnknownColor, "no " + zone + " zone in the world");

  PlannerResponse r;
  r.plan.calls = {{Primitive::SearchBall, {command.ball}},
                  {Primitive::CatchTheBall, {command.ball}},
                  {Primitive::SearchZone, {command.zone}},
                  {Primitive::GoToZone, {command.zone}},
                  {Primitive::LeaveBall, {}}};
  r.call_text = render_plan(r.plan);
  r.plan.source_text = r.call_text;
  std::ostringstream reasoning;
  reasoning << "1. search_ball(\"" << ball << "\") to find the " << ball << " Ball.\n"
            << "2. catch_the_ball(\"" << ball << "\") to pick up the " << ball << " Ball.\n"
            << "3. search_zone(\"" << zone << "\") to find the " << zone << " Zone.\n"
            << "4. go_to_zone(\"" << zone << "\") to move towards the " << zone << " Zone.\n"
            << "5. leave_ball() to leave the " << ball << " Ball in the " << zone << " Zone.";
  r.reasoning = reasoning.str();
  r.answer = "I will search for and catch the " + ball + " Ball, then find and go to the " + zone +
             " Zone to leave the ball there.";
  return r;
}

// ---------------------------------------------------------------------------
// Model output

namespace {

std::string section(std::string_view text, std::string_view label, std::initializer_list<std::string_view> ends) {
  const std::size_t at = text.find(label);
  if (at == std::string_view::npos) return {};
  const std::size_t begin = at + label.size();
  std::size_t end = text.size();
  for (const auto e : ends) {
    const std::size_t p = text.find(e, begin);
    if (p != std::string_view::npos) end = std::min(end, p);
  }
  std::string s(text.substr(begin, end - begin));
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto l = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, l - b + 1);
}

std::string strip_quotes(std::string s) {
  static const std::regex quoted(R"(^(?:``|"|“)(.*?)(?:''|"|”)$)");
  std::smatch m;
  if (std::regex_match(s, m, quoted)) return m[1];
  return s;
}

}  // namespace

PlannerResponse parse_response(std::string_view raw) {
  PlannerResponse r;
  r.call_text = extract_calls(raw);
  try {
    r.plan = parse_plan(r.call_text);
  } catch (const PlanError& e) {
    throw PlannerError(PlannerError::Kind::ParseFailed,
                       std::string(to_string(e.kind())) + " at offset " + std::to_string(e.offset()) + ": " +
                           e.what());
  }
  const std::string text = unescape_underscores(raw);
  r.reasoning = section(text, "Reasoning:", {"Response:", "Tasks to be executed:"});
  r.answer = strip_quotes(section(text, "Response:", {"\n", "Tasks to be executed:"}));
  return r;
}

// ---------------------------------------------------------------------------
// Transports

std::string HttpTransport::complete(const LlmEndpointConfig& endpoint, const std::string& prompt) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(endpoint.url, m, url_re))
    throw PlannerError(PlannerError::Kind::HTTPError, "invalid endpoint URL '" + endpoint.url + "'");
  const std::string base = m[1];
  const std::string path = m[2].matched ? std::string(m[2]) : std::string("/");

  httplib::Client client(base);
  const auto secs = static_cast<time_t>(endpoint.timeout_s);
  const auto usecs = static_cast<time_t>((endpoint.timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  if (const char* token = std::getenv(endpoint.token_env.c_str()); token && *token)
    headers.emplace("Authorization", std::string("Bearer ") + token);

  Json body;
  body["model"] = endpoint.model;
  body["temperature"] = 0;
  body["messages"] = Json::array({Json{{"role", "user"}, {"content", prompt}}});
  const auto res = client.Post(path, headers, body.dump(-1, ' ', false, Json::error_handler_t::replace), "application/json");
  if (!res) {
    throw PlannerError(PlannerError::Kind::Timeout,
                       "no response from " + base + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200)
    throw PlannerError(PlannerError::Kind::HTTPError, "endpoint returned HTTP " + std::to_string(res->status));
  try {
    const Json j = Json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw PlannerError(PlannerError::Kind::HTTPError, std::string("unexpected response body: ") + e.what());
  }
}

std::string ReplayTransport::complete(const LlmEndpointConfig&, const std::string& prompt) {
  prompts_.push_back(prompt);
  if (next_ >= responses_.size()) throw PlannerError(PlannerError::Kind::Timeout, "no recorded response left");
  return responses_[next_++];
}

PlannerResponse llm_plan(const PromptContext& ctx, const WorldState& world, const LlmEndpointConfig& endpoint,
                         LlmTransport& transport) {
  std::string prompt = build_prompt(ctx);
  PlannerResponse r;
  for (int attempt = 0;; ++attempt) {
    const std::string raw = transport.complete(endpoint, prompt);
    try {
      r = parse_response(raw);
      break;
    } catch (const PlannerError& e) {
      if (attempt > 0) throw;
      prompt += "\nYour previous reply could not be used (" + std::string(e.what()) +
                "). Reply again and end with a line starting with 'Tasks to be executed:' followed by the calls.\n";
    }
  }
  const auto report = validate_plan(r.plan, world);
  if (!report.ok()) throw PlannerError(PlannerError::Kind::ValidationFailed, report.summary(), report);
  return r;
}

}  // namespace procnav
