#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "procnav/lang.hpp"
#include "procnav/serialization.hpp"
#include "procnav/world.hpp"

namespace procnav {

struct PromptContext {
  std::string description;  ///< rendered environment description
  std::string command;      ///< the user's request
};

/// Fixed text listing the five primitives and their arguments.
std::string_view capability_list();

/// Environment, capability and output-format sections followed by the
/// command. Throws std::invalid_argument for an empty command.
std::string build_prompt(const PromptContext& ctx);

class PlannerError : public std::runtime_error {
 public:
  enum class Kind { NoCallsFound, BadCommand, UnknownColor, ParseFailed, ValidationFailed, Timeout, HTTPError };
  PlannerError(Kind kind, const std::string& what, ValidationReport report = {})
      : std::runtime_error(what), kind_(kind), report_(std::move(report)) {}
  Kind kind() const { return kind_; }
  const ValidationReport& report() const { return report_; }

 private:
  Kind kind_;
  ValidationReport report_;
};

std::string_view to_string(PlannerError::Kind k);

/// Finds the call list in free text: chains of `ident(...)` joined by ";".
/// The longest chain wins, the last one on ties. LaTeX-escaped underscores
/// are unescaped. Throws PlannerError(NoCallsFound).
std::string extract_calls(std::string_view raw);

struct ParsedCommand {
  Color ball{Color::Red};
  Color zone{Color::Red};
};

/// First palette color named in the text is the ball, the second the zone.
/// Throws PlannerError(BadCommand).
ParsedCommand parse_command(std::string_view command);

struct PlannerResponse {
  std::string reasoning;
  std::string answer;
  std::string call_text;
  Plan plan;
};

Json to_json(const PlannerResponse& r);

/// Rule-based oracle: the fixed five-call fetch-and-deliver plan.
/// Throws PlannerError(UnknownColor) when the world lacks the ball or zone.
PlannerResponse stub_plan(const WorldState& world, const ParsedCommand& command);

/// Splits labeled model output into reasoning, answer and calls, then parses
/// the calls. Throws PlannerError(NoCallsFound or ParseFailed).
PlannerResponse parse_response(std::string_view raw);

struct LlmEndpointConfig {
  std::string url{"http://127.0.0.1:8080/v1/chat/completions"};
  std::string model{"gpt-4o-mini"};
  std::string token_env{"PROCNAV_LLM_TOKEN"};  ///< name of the variable, never the token
  double timeout_s{30.0};
};

/// Sends one prompt and returns the assistant text.
class LlmTransport {
 public:
  virtual ~LlmTransport() = default;
  /// Throws PlannerError(Timeout or HTTPError).
  virtual std::string complete(const LlmEndpointConfig& endpoint, const std::string& prompt) = 0;
};

/// Chat-completion POST over HTTP(S).
class HttpTransport : public LlmTransport {
 public:
  std::string complete(const LlmEndpointConfig& endpoint, const std::string& prompt) override;
};

/// Returns recorded responses in order; used for offline runs and tests.
class ReplayTransport : public LlmTransport {
 public:
  explicit ReplayTransport(std::vector<std::string> responses) : responses_(std::move(responses)) {}
  std::string complete(const LlmEndpointConfig& endpoint, const std::string& prompt) override;
  const std::vector<std::string>& prompts() const { return prompts_; }

 private:
  std::vector<std::string> responses_;
  std::vector<std::string> prompts_;
  std::size_t next_{0};
};

/// Prompt, call extraction, parse and validation with one corrective retry
/// when no parsable calls come back.
PlannerResponse llm_plan(const PromptContext& ctx, const WorldState& world, const LlmEndpointConfig& endpoint,
                         LlmTransport& transport);

}  // namespace procnav
