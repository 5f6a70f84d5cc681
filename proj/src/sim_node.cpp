#include "procnav/sim_node.hpp"

#include <chrono>
#include <thread>

namespace procnav {

// ---------------------------------------------------------------------------
// Simulation

Simulation::Simulation(WorldState world, ExecutorOptions executor)
    : world_(std::move(world)), executor_(std::move(executor)) {}

void Simulation::set_external(int agent, Twist cmd) {
  (void)world_.agent(agent);
  runners_.erase(agent);
  oscillators_.erase(agent);
  held_[agent] = cmd;
}

void Simulation::start_plan(int agent, Plan plan) {
  (void)world_.agent(agent);
  held_.erase(agent);
  oscillators_.erase(agent);
  runners_.erase(agent);
  runners_.emplace(agent, PlanRunner(std::move(plan), agent, executor_));
}

void Simulation::set_oscillator(int agent, OscillatorControl control) {
  (void)world_.agent(agent);
  control.params.validate();
  held_.erase(agent);
  runners_.erase(agent);
  oscillators_[agent] = control;
}

void Simulation::clear_control(int agent) {
  held_.erase(agent);
  runners_.erase(agent);
  oscillators_.erase(agent);
}

const PlanRunner* Simulation::runner(int agent) const {
  const auto it = runners_.find(agent);
  return it == runners_.end() ? nullptr : &it->second;
}

bool Simulation::plans_running() const {
  for (const auto& [agent, r] : runners_)
    if (!r.finished()) return true;
  return false;
}

std::vector<Event> Simulation::step() {
  std::map<int, Twist> commands = held_;
  std::vector<Mutation> mutations;
  std::set<int> claimed_balls;
  const double t = world_.clock.time();
  for (auto& [agent, ctl] : oscillators_) commands[agent] = {ctl.linear, oscillatory_omega(ctl.params, t)};
  for (auto& [agent, runner] : runners_) {
    if (runner.finished()) continue;
    const Decision d = runner.decide(world_);
    commands[agent] = d.cmd;
    if (!d.mutation) continue;
    // Two agents reaching for one ball in the same tick: first in id order wins.
    if (d.mutation->kind == Mutation::Kind::Pickup && !claimed_balls.insert(d.mutation->ball).second) continue;
    mutations.push_back(*d.mutation);
  }
  auto events = advance_world(world_, commands, mutations);
  for (auto& [agent, runner] : runners_) runner.observe(world_, events);
  return events;
}

Json Simulation::trace_record(const std::vector<Event>& events) const {
  Json r;
  r["tick"] = world_.clock.tick();
  r["t"] = world_.clock.time();
  r["agents"] = Json::array();
  for (const auto& a : world_.agents) {
    Json j;
    j["id"] = a.id;
    j["x"] = a.pose.x;
    j["y"] = a.pose.y;
    j["theta"] = a.pose.theta;
    j["carrying"] = a.carried_ball ? Json(*a.carried_ball) : Json(nullptr);
    r["agents"].push_back(j);
  }
  r["balls"] = Json::array();
  for (const auto& b : world_.balls) {
    Json j;
    j["id"] = b.id;
    j["x"] = b.position.x;
    j["y"] = b.position.y;
    j["carried_by"] = b.carried_by ? Json(*b.carried_by) : Json(nullptr);
    r["balls"].push_back(j);
  }
  r["plans"] = Json::array();
  for (const auto& [agent, runner] : runners_) {
    Json p;
    p["agent"] = agent;
    const auto& calls = runner.calls();
    p["call_index"] = calls.empty() ? -1 : static_cast<int>(calls.size()) - 1;
    p["call"] = calls.empty() ? std::string() : render_call(calls.back().call);
    p["phase"] = calls.empty() ? std::string() : std::string(to_string(calls.back().phase));
    p["status"] = runner.failed() ? "failed" : runner.finished() ? "done" : "running";
    if (!calls.empty() && !calls.back().reason.empty()) p["reason"] = calls.back().reason;
    r["plans"].push_back(p);
  }
  r["events"] = Json::array();
  for (const auto& e : events) r["events"].push_back(to_json(e));
  return r;
}

// ---------------------------------------------------------------------------
// SimNode

namespace {

std::string agent_topic(int agent, const char* leaf) { return "/agent" + std::to_string(agent) + "/" + leaf; }

std::optional<int> agent_of(const std::string& topic, const char* leaf) {
  const std::string prefix = "/agent";
  const std::string suffix = std::string("/") + leaf;
  if (topic.size() <= prefix.size() + suffix.size() || topic.compare(0, prefix.size(), prefix) != 0 ||
      topic.compare(topic.size() - suffix.size(), suffix.size(), suffix) != 0)
    return std::nullopt;
  const std::string digits = topic.substr(prefix.size(), topic.size() - prefix.size() - suffix.size());
  if (digits.empty() || digits.size() > 6 || digits.find_first_not_of("0123456789") != std::string::npos)
    return std::nullopt;
  return std::stoi(digits);
}

std::string_view to_string(GenerationError::Kind k) {
  switch (k) {
    case GenerationError::Kind::InvalidSpec: return "InvalidSpec";
    case GenerationError::Kind::BadBoundary: return "BadBoundary";
    case GenerationError::Kind::InfeasiblePlacement: return "InfeasiblePlacement";
  }
  return "?";
}

}  // namespace

SimNode::SimNode(Broker& broker, Simulation sim, EnvironmentSpec spec, SimNodeConfig config,
                 std::unique_ptr<LlmTransport> transport)
    : broker_(broker),
      client_(broker.connect()),
      sim_(std::move(sim)),
      spec_(std::move(spec)),
      config_(std::move(config)),
      transport_(std::move(transport)),
      noise_rng_(config_.noise_seed) {
  if (!transport_) transport_ = std::make_unique<HttpTransport>();
  config_.lidar.validate();
  setup_topics();
  publish_environment();
  last_record_ = sim_.trace_record({});
  publish("/trace", "sim/TraceRecord", last_record_);
}

SimNode::~SimNode() {
  for (auto& p : pending_)
    if (p.result.valid()) p.result.wait();
  broker_.disconnect(client_);
}

void SimNode::setup_topics() {
  for (const auto& [type, check] : standard_schemas()) broker_.register_schema(type, check);
  for (const char* t : {"/areas_description", "/env/spec", "/env/world"}) broker_.latch_topic(t);

  auto advertise = [&](const std::string& topic, const std::string& type) {
    broker_.dispatch(client_, {Op::Advertise, topic, type, Json::object(), std::nullopt});
  };
  auto subscribe = [&](const std::string& topic, const std::string& type) {
    broker_.declare_topic(topic, type);
    broker_.dispatch(client_, {Op::Subscribe, topic, type, Json::object(), std::nullopt});
  };
  advertise("/areas_description", "std/String");
  advertise("/env/spec", "sim/EnvironmentSpec");
  advertise("/env/world", "sim/World");
  advertise("/trace", "sim/TraceRecord");
  advertise("/planner/response", "sim/PlannerResponse");
  for (const auto& a : sim_.world().agents) {
    advertise(agent_topic(a.id, "odom"), "sim/Odometry");
    advertise(agent_topic(a.id, "scan"), "sim/LaserScan");
    subscribe(agent_topic(a.id, "cmd_vel"), "sim/Twist");
  }
  subscribe("/plan", "std/String");
  subscribe("/command", "std/String");
  subscribe("/env/regenerate", "sim/EnvironmentSpec");
}

void SimNode::publish(const std::string& topic, const std::string& type, Json msg) {
  broker_.dispatch(client_, {Op::Publish, topic, type, std::move(msg), std::nullopt});
}

void SimNode::publish_environment() {
  publish("/env/spec", "sim/EnvironmentSpec", to_json(spec_));
  publish("/env/world", "sim/World", to_json(sim_.world()));
  Json text;
  text["data"] = render_environment_description(sim_.world());
  publish("/areas_description", "std/String", text);
}

void SimNode::handle_inbound() {
  for (const auto& e : broker_.drain(client_)) {
    BusMessage m;
    try {
      m = codec_decode(e.frame);
    } catch (const BusError&) {
      continue;
    }
    if (m.op != Op::Publish) continue;
    handle(m, e.origin);
  }
}

void SimNode::handle(const BusMessage& m, ClientId origin) {
  if (const auto agent = agent_of(m.topic, "cmd_vel")) {
    try {
      sim_.set_external(*agent, {m.msg["linear"].get<double>(), m.msg["angular"].get<double>()});
    } catch (const UnknownAgentError& e) {
      broker_.send_status(origin, "UnknownAgent", e.what(), m.topic, m.id);
    }
  } else if (m.topic == "/plan") {
    handle_plan(m, origin);
  } else if (m.topic == "/command") {
    handle_command(m, origin);
  } else if (m.topic == "/env/regenerate") {
    handle_regenerate(m, origin);
  }
}

namespace {

int requested_agent(const Json& msg) {
  const auto it = msg.find("agent");
  return it != msg.end() && it->is_number_integer() ? it->get<int>() : 0;
}

}  // namespace

void SimNode::start_plan(int agent, Plan plan) {
  sim_.start_plan(agent, std::move(plan));
}

void SimNode::handle_plan(const BusMessage& m, ClientId origin) {
  const int agent = requested_agent(m.msg);
  Plan plan;
  try {
    (void)sim_.world().agent(agent);
    plan = parse_plan(m.msg["data"].get<std::string>());
  } catch (const PlanError& e) {
    broker_.send_status(origin, to_string(e.kind()), std::string(e.what()) + " at offset " + std::to_string(e.offset()),
                        m.topic, m.id);
    return;
  } catch (const UnknownAgentError& e) {
    broker_.send_status(origin, "UnknownAgent", e.what(), m.topic, m.id);
    return;
  }
  const auto report = validate_plan(plan, sim_.world());
  if (!report.ok()) {
    broker_.send_status(origin, "ValidationFailed", report.summary(), m.topic, m.id);
    return;
  }
  if (!report.warnings.empty()) broker_.send_status(origin, "ValidationWarning", report.summary(), m.topic, m.id, "warning");
  start_plan(agent, std::move(plan));
}

void SimNode::handle_command(const BusMessage& m, ClientId origin) {
  const int agent = requested_agent(m.msg);
  const std::string command = m.msg["data"].get<std::string>();
  try {
    (void)sim_.world().agent(agent);
  } catch (const UnknownAgentError& e) {
    broker_.send_status(origin, "UnknownAgent", e.what(), m.topic, m.id);
    return;
  }
  if (config_.planner == "llm") {
    if (!pending_.empty()) {
      broker_.send_status(origin, "Busy", "a planner request is already running", m.topic, m.id);
      return;
    }
    PromptContext ctx{render_environment_description(sim_.world()), command};
    auto task = [ctx, world = sim_.world(), endpoint = config_.llm, transport = transport_.get()] {
      return llm_plan(ctx, world, endpoint, *transport);
    };
    pending_.push_back({agent, origin, m.id, std::async(std::launch::async, task)});
    return;
  }
  if (config_.planner != "stub") {
    broker_.send_status(origin, "PlannerDisabled", "no planner is configured", m.topic, m.id);
    return;
  }
  try {
    PlannerResponse r = stub_plan(sim_.world(), parse_command(command));
    Json j = to_json(r);
    j["agent"] = agent;
    publish("/planner/response", "sim/PlannerResponse", j);
    start_plan(agent, std::move(r.plan));
  } catch (const PlannerError& e) {
    broker_.send_status(origin, to_string(e.kind()), e.what(), m.topic, m.id);
  }
}

void SimNode::collect_planner_results() {
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->result.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
      ++it;
      continue;
    }
    try {
      PlannerResponse r = it->result.get();
      Json j = to_json(r);
      j["agent"] = it->agent;
      publish("/planner/response", "sim/PlannerResponse", j);
      start_plan(it->agent, std::move(r.plan));
    } catch (const PlannerError& e) {
      broker_.send_status(it->origin, to_string(e.kind()), e.what(), "/command", it->id);
      Json j;
      j["agent"] = it->agent;
      j["error"] = to_string(e.kind());
      j["text"] = e.what();
      publish("/planner/response", "sim/PlannerResponse", j);
    } catch (const std::exception& e) {
      broker_.send_status(it->origin, "PlannerError", e.what(), "/command", it->id);
    }
    it = pending_.erase(it);
  }
}

void SimNode::handle_regenerate(const BusMessage& m, ClientId origin) {
  try {
    EnvironmentSpec spec = spec_from_json(m.msg);
    WorldState world = generate_environment(spec, config_.generation);
    const std::size_t old_agents = sim_.world().agents.size();
    sim_ = Simulation(std::move(world), sim_.executor_options());
    spec_ = std::move(spec);
    if (sim_.world().agents.size() != old_agents) setup_topics();
    publish_environment();
  } catch (const GenerationError& e) {
    broker_.send_status(origin, to_string(e.kind()), e.what(), m.topic, m.id);
  }
}

void SimNode::publish_sensors() {
  const auto& w = sim_.world();
  const bool scan_now = config_.scan_every > 0 && w.clock.tick() % static_cast<std::uint64_t>(config_.scan_every) == 0;
  for (const auto& a : w.agents) {
    const OdometrySample o = sample_odometry(w, a.id, config_.odometry_noise, noise_rng_);
    Json odom;
    odom["stamp"] = o.stamp;
    odom["pose"] = to_json(o.pose);
    odom["twist"] = to_json(o.twist);
    odom["noise"] = {{"sigma_xy", o.noise_sigma_xy}, {"sigma_theta", o.noise_sigma_theta}};
    publish(agent_topic(a.id, "odom"), "sim/Odometry", odom);
    if (!scan_now) continue;
    const ScanFrame s = lidar_scan(w, a.id, config_.lidar);
    Json scan;
    scan["stamp"] = s.stamp;
    scan["angle_min"] = s.angle_min;
    scan["angle_increment"] = s.angle_increment;
    scan["range_max"] = s.range_max;
    scan["ranges"] = s.ranges;
    publish(agent_topic(a.id, "scan"), "sim/LaserScan", scan);
  }
}

std::vector<Event> SimNode::step() {
  handle_inbound();
  collect_planner_results();
  auto events = sim_.step();
  last_record_ = sim_.trace_record(events);
  publish("/trace", "sim/TraceRecord", last_record_);
  publish_sensors();
  return events;
}

void SimNode::run(const std::atomic<bool>& stop, double realtime_factor) {
  using clock = std::chrono::steady_clock;
  auto next = clock::now();
  while (!stop) {
    step();
    if (realtime_factor > 0.0) {
      next += std::chrono::duration_cast<clock::duration>(
          std::chrono::duration<double>(sim_.world().clock.dt() / realtime_factor));
      std::this_thread::sleep_until(next);
    }
  }
}

}  // namespace procnav
