#pragma once

#include <json.hpp>
#include <string>

#include "procnav/procgen.hpp"
#include "procnav/world.hpp"

namespace procnav {

/// Insertion-ordered JSON keeps declaration order (ball and zone colors) and
/// gives byte-stable output.
using Json = nlohmann::ordered_json;

Json to_json(const Pose& p);
Json to_json(const Twist& t);
Json to_json(const Event& e);

Json to_json(const EnvironmentSpec& spec);
/// Throws GenerationError(InvalidSpec) on missing or mistyped fields.
EnvironmentSpec spec_from_json(const Json& j);

Json to_json(const GridLayout& layout);
GridLayout layout_from_json(const Json& j);

Json to_json(const WorldState& world);
/// Throws std::invalid_argument on malformed input.
WorldState world_from_json(const Json& j);

/// Reads a whole file; throws std::runtime_error when it cannot be opened.
std::string read_file(const std::string& path);
/// Writes atomically through a temporary file in the same directory.
void write_file(const std::string& path, const std::string& contents);

}  // namespace procnav
