#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "procnav/world.hpp"

namespace procnav {

/// Declarative parameters for one rectangular area. Entries and exits are
/// given in area-local cell coordinates and must lie on a wall shared with a
/// neighboring area.
struct AreaSpec {
  int width_cells{10};
  int height_cells{10};
  int obstacle_count{0};
  std::vector<std::pair<Color, int>> balls;  // declaration order is kept
  std::vector<std::pair<Color, int>> zones;
  int agents{0};
  std::vector<CellIndex> entries;
  std::vector<CellIndex> exits;

  int item_count() const;
};

struct EnvironmentSpec {
  std::uint64_t seed{0};
  std::vector<AreaSpec> areas;
  double cell_size{1.0};
};

/// Size ranges are in cell units (meters at the default 1 m cell).
struct GenerationOptions {
  int max_attempts{100};
  int item_tries{64};
  double obstacle_side_min{0.4};
  double obstacle_side_max{1.5};
  double obstacle_jitter{0.25};
  /// Jitter of targets and spawns; keeps the robot disc clear of walls when it
  /// stands on a jittered boundary-cell target.
  double item_jitter{0.15};
  /// Cells closer than this to an obstacle shape are marked as obstacle cells,
  /// so a robot center inside a free cell keeps this much extra clearance.
  double obstacle_clearance{0.2};
  double ball_radius{0.1};
  double zone_radius{0.5};
  double dt{0.05};
  WorldParams params;
};

class GenerationError : public std::runtime_error {
 public:
  enum class Kind { InvalidSpec, BadBoundary, InfeasiblePlacement };
  GenerationError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Throws GenerationError(InvalidSpec) on a malformed spec.
void validate_spec(const EnvironmentSpec& spec);

/// Seeded cell-level plan of the world: walls, passages, entry/exit cells and
/// the cell of every obstacle, ball, zone and agent.
GridLayout partition_grid(const EnvironmentSpec& spec, const GenerationOptions& options = {});

/// Full continuous world for the spec; a pure function of (spec, options).
WorldState generate_environment(const EnvironmentSpec& spec, const GenerationOptions& options = {});

struct WitnessPath {
  CellIndex from;
  CellIndex to;
  std::vector<CellIndex> cells;
};

struct ConnectivityReport {
  bool connected{true};
  std::vector<WitnessPath> witnesses;
  std::vector<std::pair<CellIndex, CellIndex>> unreachable;
};

/// 4-neighbor BFS over non-blocked cells from every agent cell to every ball,
/// zone and adjacent passage cell of the agent's area.
ConnectivityReport check_connectivity(const GridLayout& layout);

/// Wall segments bounding the free space of a layout, collinear runs merged.
std::vector<Segment> wall_segments(const GridLayout& layout);

}  // namespace procnav
