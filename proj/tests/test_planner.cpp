#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdlib>
#include <thread>

#include "oracles.hpp"
#include "procnav/planner.hpp"
#include "procnav/serialization.hpp"

using namespace procnav;

namespace {

const char* kCanonical =
    "search_ball('Orange'); catch_the_ball('Orange'); search_zone('Green'); go_to_zone('Green'); leave_ball();";

WorldState golden_world() {
  return generate_environment(spec_from_json(Json::parse(oracle::fixture("golden_world_spec.json"))));
}

PlannerError::Kind planner_error(auto&& fn) {
  try {
    fn();
  } catch (const PlannerError& e) {
    return e.kind();
  }
  FAIL("no PlannerError");
  return PlannerError::Kind::HTTPError;
}

// Accepts one HTTP request on an ephemeral port and answers with a fixed
// status and body. The raw request is kept for inspection.
class OneShotServer {
 public:
  OneShotServer(int status, std::string body) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    ::listen(fd_, 1);
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this, status, body = std::move(body)] {
      const int c = ::accept(fd_, nullptr, nullptr);
      if (c < 0) return;
      char buf[8192];
      std::size_t want = std::string::npos;
      while (true) {
        const auto n = ::recv(c, buf, sizeof buf, 0);
        if (n <= 0) break;
        request_.append(buf, static_cast<std::size_t>(n));
        const auto end = request_.find("\r\n\r\n");
        if (end != std::string::npos && want == std::string::npos) {
          auto cl = request_.find("Content-Length: ");
          want = end + 4 + (cl == std::string::npos ? 0 : std::stoul(request_.substr(cl + 16)));
        }
        if (want != std::string::npos && request_.size() >= want) break;
      }
      const std::string reply = "HTTP/1.1 " + std::to_string(status) + " X\r\nContent-Type: application/json\r\n" +
                                "Content-Length: " + std::to_string(body.size()) +
                                "\r\nConnection: close\r\n\r\n" + body;
      ::send(c, reply.data(), reply.size(), MSG_NOSIGNAL);
      ::close(c);
    });
  }
  ~OneShotServer() {
    ::shutdown(fd_, SHUT_RDWR);
    thread_.join();
    ::close(fd_);
  }
  int port() const { return port_; }
  const std::string& request() const { return request_; }

 private:
  int fd_{-1};
  int port_{0};
  std::thread thread_;
  std::string request_;
};

}  // namespace

TEST_CASE("prompt sections") {
  const auto world = golden_world();
  const std::string desc = render_environment_description(world);
  const auto prompt = build_prompt({desc, "bring the orange ball to the green zone"});
  CHECK(prompt.find(desc) != std::string::npos);
  CHECK(prompt.find("## Capabilities") != std::string::npos);
  for (const char* name : {"search_ball", "catch_the_ball", "search_zone", "go_to_zone", "leave_ball"})
    CHECK(prompt.find(name) != std::string::npos);
  CHECK(prompt.find("bring the orange ball to the green zone") != std::string::npos);
  CHECK(build_prompt({"", "x"}).find("(no areas reported)") != std::string::npos);
  CHECK_THROWS_AS(build_prompt({desc, ""}), std::invalid_argument);
}

TEST_CASE("call extraction from recorded transcripts") {
  const Plan expect = parse_plan(kCanonical);
  for (const char* file : {"transcripts/fetch_orange_green.txt", "transcripts/fetch_orange_green_latex.txt",
                           "transcripts/noisy_split_lines.txt", "transcripts/noisy_commentary.txt",
                           "transcripts/noisy_typographic.txt"}) {
    INFO(file);
    const auto text = oracle::fixture(file);
    REQUIRE(!text.empty());
    CHECK(parse_plan(extract_calls(text)) == expect);
  }
  CHECK(planner_error([] { extract_calls(oracle::fixture("transcripts/refusal.txt")); }) ==
        PlannerError::Kind::NoCallsFound);
}

TEST_CASE("labeled sections of a response") {
  const auto r = parse_response(oracle::fixture("transcripts/fetch_orange_green_latex.txt"));
  CHECK(r.answer ==
        "I will search for and catch the Orange Ball, then find and go to the Green Zone to leave the ball there.");
  CHECK(r.reasoning.find("catch_the_ball") != std::string::npos);
  CHECK(r.plan == parse_plan(kCanonical));
}

TEST_CASE("stub planner") {
  const auto world = golden_world();
  const auto cmd = parse_command("Please put the orange ball in the GREEN zone");
  CHECK(cmd.ball == Color::Orange);
  CHECK(cmd.zone == Color::Green);
  const auto r = stub_plan(world, cmd);
  CHECK(r.call_text == kCanonical);
  CHECK(r.plan == parse_plan(kCanonical));
  CHECK_FALSE(r.answer.empty());

  CHECK(planner_error([] { parse_command("go somewhere"); }) == PlannerError::Kind::BadCommand);
  CHECK(planner_error([&] { stub_plan(world, {Color::Blue, Color::Green}); }) == PlannerError::Kind::UnknownColor);

  const auto j = to_json(r);
  CHECK(j["call_text"] == kCanonical);
  CHECK(j["calls"].size() == 5);
}

TEST_CASE("offline planning with replayed responses") {
  const auto world = golden_world();
  const PromptContext ctx{render_environment_description(world), "orange ball to green zone"};
  {
    ReplayTransport t({oracle::fixture("transcripts/fetch_orange_green.txt")});
    const auto r = llm_plan(ctx, world, {}, t);
    CHECK(r.plan == stub_plan(world, parse_command(ctx.command)).plan);
    REQUIRE(t.prompts().size() == 1);
  }
  {
    ReplayTransport t({oracle::fixture("transcripts/refusal.txt"), oracle::fixture("transcripts/noisy_split_lines.txt")});
    const auto r = llm_plan(ctx, world, {}, t);
    CHECK(r.plan == parse_plan(kCanonical));
    REQUIRE(t.prompts().size() == 2);
    CHECK(t.prompts()[1].size() > t.prompts()[0].size());
  }
  {
    ReplayTransport t({"nothing", "still nothing"});
    CHECK(planner_error([&] { llm_plan(ctx, world, {}, t); }) == PlannerError::Kind::NoCallsFound);
  }
  {
    ReplayTransport t({oracle::fixture("transcripts/invalid_color.txt")});
    try {
      llm_plan(ctx, world, {}, t);
      FAIL("expected ValidationFailed");
    } catch (const PlannerError& e) {
      CHECK(e.kind() == PlannerError::Kind::ValidationFailed);
      CHECK_FALSE(e.report().ok());
    }
  }
  {
    ReplayTransport t({"Tasks to be executed: search_ball('Orange'); jump();",
                       "Tasks to be executed: search_ball('Orange'); jump();"});
    CHECK(planner_error([&] { llm_plan(ctx, world, {}, t); }) == PlannerError::Kind::ParseFailed);
  }
}

TEST_CASE("http transport against a local endpoint") {
  const std::string content = oracle::fixture("transcripts/fetch_orange_green.txt");
  Json reply;
  reply["choices"] = Json::array({Json{{"message", Json{{"role", "assistant"}, {"content", content}}}}});
  ::setenv("PROCNAV_TEST_TOKEN", "secret-value", 1);
  {
    OneShotServer server(200, reply.dump());
    LlmEndpointConfig cfg;
    cfg.url = "http://127.0.0.1:" + std::to_string(server.port()) + "/v1/chat/completions";
    cfg.token_env = "PROCNAV_TEST_TOKEN";
    cfg.timeout_s = 5;
    HttpTransport t;
    CHECK(t.complete(cfg, "hello prompt") == content);
    CHECK(server.request().rfind("POST /v1/chat/completions", 0) == 0);
    CHECK(server.request().find("Authorization: Bearer secret-value") != std::string::npos);
    CHECK(server.request().find("hello prompt") != std::string::npos);
  }
  {
    OneShotServer server(500, "{}");
    LlmEndpointConfig cfg;
    cfg.url = "http://127.0.0.1:" + std::to_string(server.port()) + "/x";
    cfg.timeout_s = 5;
    HttpTransport t;
    CHECK(planner_error([&] { t.complete(cfg, "p"); }) == PlannerError::Kind::HTTPError);
  }
  {
    LlmEndpointConfig cfg;
    cfg.url = "http://127.0.0.1:1/x";
    cfg.timeout_s = 1;
    HttpTransport t;
    CHECK(planner_error([&] { t.complete(cfg, "p"); }) == PlannerError::Kind::Timeout);
  }
}
