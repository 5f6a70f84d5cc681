#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "procnav/bridge_server.hpp"
#include "procnav/executor.hpp"
#include "procnav/planner.hpp"
#include "procnav/procgen.hpp"
#include "procnav/sensors.hpp"
#include "procnav/serialization.hpp"
#include "procnav/sim_node.hpp"

namespace procnav {

// ---------------------------------------------------------------------------
// Scenarios

struct AgentControlConfig {
  std::string mode{"plan"};  ///< plan | oscillator | external
  std::string plan;          ///< call text; empty asks the planner
  OscillatorControl oscillator;
};

struct ScenarioConfig {
  EnvironmentSpec environment;
  GenerationOptions generation;
  std::vector<AgentControlConfig> agents;  ///< missing entries are external
  std::optional<double> duration_s;
  std::optional<std::uint64_t> duration_ticks;
  LidarConfig lidar;
  OdometryNoise odometry;
  std::uint64_t odometry_seed{0};
  int scan_every{2};
  ExecutorOptions executor;
  std::string planner{"none"};  ///< stub | llm | none
  std::string command;
  LlmEndpointConfig llm;
  std::string trace_path;
  std::string metrics_path;
  bool bridge_enabled{false};
  BridgeConfig bridge;
  double realtime_factor{1.0};  ///< pacing while the bridge is enabled
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sets `dotted.key` (array elements by index) to a value parsed as JSON,
/// falling back to a plain string. Missing objects are created.
void apply_override(Json& config, const std::string& dotted_key, const std::string& value);

/// Throws ConfigError on unknown keys, wrong types or invalid values.
ScenarioConfig scenario_from_json(const Json& j);

enum class ExitCode : int { Ok = 0, Config = 1, Generation = 2, PlanFailure = 3, Timeout = 4, Planner = 5 };

struct ExitReport {
  ExitCode code{ExitCode::Ok};
  std::string message;
  std::uint64_t ticks{0};
  std::map<std::string, std::string> metrics;  ///< written as key=value lines
};

/// Builds the world, runs every controller for the duration (or until all
/// plans finish), then writes the trace and metrics files. Nothing is
/// written when generation or configuration fails.
ExitReport run_scenario(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Trajectories and error metrics

struct TrajectorySample {
  double t{0.0};
  Pose pose;
};

using TrajectoryLog = std::vector<TrajectorySample>;

/// Closed regular pentagon traced counterclockwise at constant speed from
/// (0,0,0), turning 2pi/5 at each vertex. Sampled every dt; the final vertex
/// is always included.
TrajectoryLog generate_pentagon_reference(double side, double v, double dt);

/// The damped-oscillator angular velocity with constant linear speed,
/// integrated from (0,0,0) for round(duration/dt) steps.
TrajectoryLog run_oscillator_trajectory(const OscillatorParams& params, double v, double duration, double dt);

struct PathMetrics {
  double rmse{0.0};
  double max_dev{0.0};
  double endpoint{0.0};
  double symmetric_rmse{0.0};
  double symmetric_max_dev{0.0};
};

/// Points spaced `step` apart along the log's polyline; the last point is kept.
std::vector<Vec2> resample_by_arc_length(const TrajectoryLog& log, double step = 0.01);

/// Both logs are resampled at 1 cm; distances run from each point of `a` to
/// the resampled polyline of `b`. Throws std::invalid_argument when a log has
/// fewer than two samples or zero length.
PathMetrics compute_path_error(const TrajectoryLog& a, const TrajectoryLog& b);

/// Parallel offset by `distance` to the left of travel (negative: right),
/// with mitered corners. A closed loop stays closed.
TrajectoryLog offset_polyline(const TrajectoryLog& log, double distance);

/// Coarse run against the same dynamics at dt/100.
PathMetrics oscillator_fidelity(const OscillatorParams& params, double v, double duration, double dt);

}  // namespace procnav
