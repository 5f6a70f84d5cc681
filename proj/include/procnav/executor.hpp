#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "procnav/lang.hpp"
#include "procnav/sensors.hpp"
#include "procnav/world.hpp"

namespace procnav {

// ---------------------------------------------------------------------------
// Path planning and following

struct PathPlan {
  std::vector<Vec2> waypoints;
  std::vector<CellIndex> cells;
  double total_length{0.0};
};

class NoPathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A* over 4-connected free cells, unit edge cost, Manhattan heuristic.
/// Waypoints are the cell centers with the last one replaced by `to`. A start
/// point inside a blocked cell is snapped to the nearest free neighbor.
/// Throws NoPathError when the target cell is unreachable and
/// std::invalid_argument when either point is outside the grid.
PathPlan plan_path(const GridLayout& layout, Vec2 from, Vec2 to);

struct FollowerGains {
  double lookahead{0.6};
  double k_theta{2.0};
  double max_linear{1.0};
  double max_angular{3.141592653589793};
  double arrival_radius{0.15};
  double align_tolerance{0.7853981633974483};  ///< no forward speed beyond this heading error
};

/// Arc-length position of the point on the path closest to p.
double path_progress(const PathPlan& plan, Vec2 p);
/// Path length remaining after the point closest to p.
double path_remaining(const PathPlan& plan, Vec2 p);

/// Pure pursuit toward the point `lookahead` meters further along the path
/// than the closest point. Zero twist once within arrival_radius of the end.
Twist follow_path(const Pose& pose, const PathPlan& plan, const FollowerGains& gains = {});

// ---------------------------------------------------------------------------
// Primitive behaviors

enum class Phase { Exploring, Navigating, Acting, Done, Failed };

std::string_view to_string(Phase p);
inline bool is_terminal(Phase p) { return p == Phase::Done || p == Phase::Failed; }

struct ExecutorOptions {
  int step_budget{5000};
  int watchdog_window{50};
  int max_replans{3};
  double catch_radius{0.3};
  FollowerGains gains;
  LidarConfig lidar;
};

/// What an agent has learned so far; persists across the calls of a plan.
struct AgentMemory {
  std::map<Color, int> known_balls;  // color -> ball id
  std::map<Color, int> chosen_zones;
  std::set<CellIndex> visited;
};

struct BehaviorState {
  PrimitiveCall active_call;
  Phase phase{Phase::Navigating};
  std::optional<Vec2> target;
  int step_budget{5000};
  std::string reason;  // failure reason or completion note

  // Navigation bookkeeping.
  std::optional<PathPlan> path;
  std::optional<CellIndex> frontier;
  int replans{0};
  double best_remaining{0.0};
  int ticks_without_progress{0};
  bool mutation_pending{false};

  static BehaviorState start(const PrimitiveCall& call, const ExecutorOptions& options);
};

struct Decision {
  Twist cmd;
  std::optional<Mutation> mutation;
};

/// One control tick for `agent`. Updates `state` (and `memory`) and returns the
/// command for the next world step. When the state becomes terminal the
/// returned decision is a zero twist and must not be stepped.
Decision execute_primitive(const PrimitiveCall& call, const WorldState& world, int agent,
                           BehaviorState& state, AgentMemory& memory,
                           const ExecutorOptions& options = {});

/// True when a free ball of `color` is within lidar range, inside the fov and
/// not occluded. Returns the ball id.
std::optional<int> visible_ball(const WorldState& world, int agent, Color color, const LidarConfig& lidar);

// ---------------------------------------------------------------------------
// Plan execution

struct PhaseChange {
  std::uint64_t tick{0};
  Phase phase{Phase::Navigating};
};

struct CallRecord {
  PrimitiveCall call;
  Phase phase{Phase::Navigating};
  std::uint64_t start_tick{0};
  std::uint64_t end_tick{0};
  std::vector<PhaseChange> transitions;
  std::vector<Event> events;
  std::optional<Vec2> target;
  std::string reason;
};

struct TickRecord {
  std::uint64_t tick{0};
  double t{0.0};
  std::vector<std::pair<int, Pose>> poses;
  int call_index{-1};
  std::string call;
  Phase phase{Phase::Navigating};
  std::vector<Event> events;
};

struct ExecutionTrace {
  int agent{0};
  std::vector<CallRecord> calls;
  std::vector<TickRecord> ticks;
  std::uint64_t ticks_used{0};
  bool completed() const;
};

/// Steps a plan for one agent call by call; used directly by run_plan and by
/// the live simulator, where several runners share one world step.
class PlanRunner {
 public:
  PlanRunner(Plan plan, int agent, ExecutorOptions options = {});

  int agent() const { return agent_; }
  bool finished() const;
  bool failed() const { return failed_; }
  const Plan& plan() const { return plan_; }
  const std::vector<CallRecord>& calls() const { return records_; }
  int current_call() const { return static_cast<int>(index_); }
  std::optional<Phase> current_phase() const;

  /// Decides the command for the coming step. Calls that finish without
  /// motion are closed out inside this function; the returned decision
  /// belongs to the first call still running (zero twist when finished).
  Decision decide(const WorldState& world);

  /// Records the events of the step that consumed the last decision.
  void observe(const WorldState& world, const std::vector<Event>& events);

 private:
  void open_call(std::uint64_t tick);
  void note_phase(std::uint64_t tick);

  Plan plan_;
  int agent_;
  ExecutorOptions options_;
  std::size_t index_{0};
  bool failed_{false};
  bool opened_{false};
  BehaviorState state_;
  AgentMemory memory_;
  std::vector<CallRecord> records_;
};

/// Executes the calls strictly in order, stopping at the first failure. The
/// world is only changed through advance_world. Never throws for behavior
/// failures; they are recorded in the trace.
ExecutionTrace run_plan(const Plan& plan, WorldState& world, int agent = 0,
                        const ExecutorOptions& options = {});

}  // namespace procnav
