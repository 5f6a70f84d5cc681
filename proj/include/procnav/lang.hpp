#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "procnav/world.hpp"

namespace procnav {

// ---------------------------------------------------------------------------
// Environment descriptions
// ---------------------------------------------------------------------------

enum class ItemKind { Ball, Zone };

struct DescriptionItem {
  int count{0};
  Color color{Color::Red};
  ItemKind kind{ItemKind::Ball};
  friend bool operator==(const DescriptionItem&, const DescriptionItem&) = default;
};

struct AreaDescription {
  int area_index{1};  // 1-based, as printed
  std::vector<DescriptionItem> items;
  int obstacle_count{0};
  friend bool operator==(const AreaDescription&, const AreaDescription&) = default;
};

/// Counts what currently lies inside the area (0-based index). Balls come
/// before zones, each in the area's declared color order; items with a zero
/// count are left out.
AreaDescription describe_area(const WorldState& world, int area);

/// "Area 1 has 1 Orange Ball, 1 Red Zone, 1 Green Zone, 5 obstacles."
std::string render_area_description(const AreaDescription& desc);
std::string render_area_description(const WorldState& world, int area);

/// "Received areas information: " followed by one sentence per area.
std::string render_environment_description(const WorldState& world);

class DescriptionError : public std::runtime_error {
 public:
  DescriptionError(const std::string& what, std::size_t offset)
      : std::runtime_error(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

AreaDescription parse_area_description(std::string_view text);
/// Accepts the prefixed multi-area form.
std::vector<AreaDescription> parse_environment_description(std::string_view text);

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

enum class Primitive { SearchBall, CatchTheBall, SearchZone, GoToZone, LeaveBall };

std::string_view to_string(Primitive p);
std::optional<Primitive> parse_primitive(std::string_view name);
int arity(Primitive p);
bool targets_ball(Primitive p);
bool targets_zone(Primitive p);

struct PrimitiveCall {
  Primitive name{Primitive::LeaveBall};
  std::vector<Color> args;
  friend bool operator==(const PrimitiveCall&, const PrimitiveCall&) = default;
};

struct Plan {
  std::vector<PrimitiveCall> calls;
  std::string source_text;

  /// Plans compare by their calls; the source text is provenance only.
  friend bool operator==(const Plan& a, const Plan& b) { return a.calls == b.calls; }
};

class PlanError : public std::runtime_error {
 public:
  enum class Kind { UnknownPrimitive, ArityMismatch, UnknownColor, SyntaxError, EmptyPlan };
  PlanError(Kind kind, std::size_t offset, std::string token, const std::string& message);
  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }
  const std::string& token() const { return token_; }

 private:
  Kind kind_;
  std::size_t offset_;
  std::string token_;
};

std::string_view to_string(PlanError::Kind k);

/// Strict parser for `call (";" call)* [";"]`. Arguments are quoted colors;
/// accepted quote pairs are '...', "...", `...', `...`, ``...'', ``...",
/// and the typographic pairs. Throws PlanError.
Plan parse_plan(std::string_view text);

/// Canonical form, e.g. "search_ball('Orange')".
std::string render_call(const PrimitiveCall& call);
/// Canonical form: calls joined by "; " with a trailing ";".
std::string render_plan(const Plan& plan);

struct ValidationIssue {
  std::size_t call_index{0};
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;
  bool ok() const { return errors.empty(); }
  std::string summary() const;
};

/// Grounds a plan in a world: unknown colors are errors, odd sequencing is a
/// warning. Never throws.
ValidationReport validate_plan(const Plan& plan, const WorldState& world);

}  // namespace procnav
