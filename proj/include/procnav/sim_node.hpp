#pragma once

#include <atomic>
#include <future>
#include <list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "procnav/bus.hpp"
#include "procnav/executor.hpp"
#include "procnav/planner.hpp"
#include "procnav/procgen.hpp"
#include "procnav/rng.hpp"
#include "procnav/sensors.hpp"

namespace procnav {

struct OscillatorControl {
  OscillatorParams params;
  double linear{0.5};
};

/// World plus per-agent controllers. Each agent is driven by at most one of:
/// a held external command, a plan runner, or the oscillator profile.
class Simulation {
 public:
  explicit Simulation(WorldState world, ExecutorOptions executor = {});

  const WorldState& world() const { return world_; }
  const ExecutorOptions& executor_options() const { return executor_; }

  /// Throws UnknownAgentError.
  void set_external(int agent, Twist cmd);
  void start_plan(int agent, Plan plan);
  void set_oscillator(int agent, OscillatorControl control);
  void clear_control(int agent);

  /// Advances one tick and returns its events.
  std::vector<Event> step();

  const PlanRunner* runner(int agent) const;
  bool plans_running() const;

  /// One trace line for the current tick.
  Json trace_record(const std::vector<Event>& events) const;

 private:
  WorldState world_;
  ExecutorOptions executor_;
  std::map<int, Twist> held_;
  std::map<int, PlanRunner> runners_;
  std::map<int, OscillatorControl> oscillators_;
};

struct SimNodeConfig {
  GenerationOptions generation;
  LidarConfig lidar;
  OdometryNoise odometry_noise;
  std::uint64_t noise_seed{0};
  int scan_every{2};  ///< publish a scan every n ticks
  std::string planner{"stub"};  ///< stub | llm | none
  LlmEndpointConfig llm;
};

/// Owns the live simulation on the bus: applies inbound topics at tick
/// boundaries and publishes odometry, scans, trace records and the latched
/// environment topics.
class SimNode {
 public:
  /// `transport` is used for planner=llm; an HttpTransport when null.
  SimNode(Broker& broker, Simulation sim, EnvironmentSpec spec, SimNodeConfig config,
          std::unique_ptr<LlmTransport> transport = nullptr);
  ~SimNode();
  SimNode(const SimNode&) = delete;
  SimNode& operator=(const SimNode&) = delete;

  /// Applies queued inbound messages, steps once and publishes.
  std::vector<Event> step();
  /// Steps until `stop` is set, paced at dt / realtime_factor (no pacing when
  /// the factor is not positive).
  void run(const std::atomic<bool>& stop, double realtime_factor = 1.0);

  const Simulation& sim() const { return sim_; }
  ClientId client() const { return client_; }
  /// The last trace record published.
  const Json& last_record() const { return last_record_; }

 private:
  void setup_topics();
  void publish(const std::string& topic, const std::string& type, Json msg);
  void publish_environment();
  void handle_inbound();
  void handle(const BusMessage& m, ClientId origin);
  void handle_plan(const BusMessage& m, ClientId origin);
  void handle_command(const BusMessage& m, ClientId origin);
  void handle_regenerate(const BusMessage& m, ClientId origin);
  void collect_planner_results();
  void publish_sensors();
  void start_plan(int agent, Plan plan);

  struct PendingPlan {
    int agent{0};
    ClientId origin{0};
    std::optional<std::string> id;
    std::future<PlannerResponse> result;
  };

  Broker& broker_;
  ClientId client_;
  Simulation sim_;
  EnvironmentSpec spec_;
  SimNodeConfig config_;
  std::unique_ptr<LlmTransport> transport_;
  Rng noise_rng_;
  std::list<PendingPlan> pending_;
  Json last_record_;
};

}  // namespace procnav
