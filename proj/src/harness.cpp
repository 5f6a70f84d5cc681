#include "procnav/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace procnav {

// ---------------------------------------------------------------------------
// Configuration

void apply_override(Json& config, const std::string& dotted_key, const std::string& value) {
  if (dotted_key.empty()) throw ConfigError("empty override key");
  Json parsed;
  try {
    parsed = Json::parse(value);
  } catch (const Json::exception&) {
    parsed = value;
  }
  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_key.find('.', start);
    const std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("malformed override key '" + dotted_key + "'");
    Json* next = nullptr;
    if (node->is_array()) {
      if (part.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("override key '" + dotted_key + "': '" + part + "' is not an index");
      const std::size_t index = std::stoul(part);
      if (index > node->size()) throw ConfigError("override key '" + dotted_key + "': index out of range");
      if (index == node->size()) node->push_back(Json::object());
      next = &(*node)[index];
    } else {
      if (node->is_null()) *node = Json::object();
      if (!node->is_object()) throw ConfigError("override key '" + dotted_key + "' descends into a scalar");
      next = &(*node)[part];
    }
    if (dot == std::string::npos) {
      *next = parsed;
      return;
    }
    node = next;
    start = dot + 1;
  }
}

namespace {

// Reads fields of one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + " must be an object");
  }
  ~Fields() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError("unknown key '" + where(key) + "'");
  }

  template <typename T>
  bool get(const std::string& key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return false;
    try {
      out = it->template get<T>();
    } catch (const Json::exception&) {
      throw ConfigError("'" + where(key) + "' has the wrong type");
    }
    return true;
  }

  const Json* object(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    return &*it;
  }

  std::string where(const std::string& key) const {
    if (path_.empty()) return key;
    return key.empty() ? path_ : path_ + "." + key;
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

OscillatorParams oscillator_from_json(const Json& j, const std::string& path) {
  OscillatorParams p;
  Fields f(j, path);
  f.get("amplitude", p.amplitude);
  f.get("damping", p.damping);
  f.get("onset", p.onset);
  f.get("period", p.period);
  f.get("bias", p.bias);
  return p;
}

}  // namespace

ScenarioConfig scenario_from_json(const Json& j) {
  ScenarioConfig c;
  Fields top(j, "");
  const Json* env = top.object("environment");
  if (!env) throw ConfigError("missing 'environment'");
  try {
    c.environment = spec_from_json(*env);
  } catch (const GenerationError& e) {
    throw ConfigError(std::string("environment: ") + e.what());
  }
  double dt = c.generation.dt;
  top.get("dt", dt);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("'dt' must be positive");
  c.generation.dt = dt;

  if (const Json* d = top.object("duration")) {
    Fields f(*d, "duration");
    double seconds = 0.0;
    std::uint64_t ticks = 0;
    if (f.get("seconds", seconds)) {
      if (!(seconds > 0.0)) throw ConfigError("'duration.seconds' must be positive");
      c.duration_s = seconds;
    }
    if (f.get("ticks", ticks)) c.duration_ticks = ticks;
    if (c.duration_s && c.duration_ticks) throw ConfigError("give duration in seconds or ticks, not both");
  }

  if (const Json* agents = top.object("agents")) {
    if (!agents->is_array()) throw ConfigError("'agents' must be an array");
    for (std::size_t i = 0; i < agents->size(); ++i) {
      const std::string path = "agents." + std::to_string(i);
      Fields f((*agents)[i], path);
      AgentControlConfig a;
      f.get("mode", a.mode);
      if (a.mode != "plan" && a.mode != "oscillator" && a.mode != "external")
        throw ConfigError("'" + path + ".mode' must be plan, oscillator or external");
      f.get("plan", a.plan);
      f.get("linear", a.oscillator.linear);
      if (const Json* o = f.object("oscillator")) a.oscillator.params = oscillator_from_json(*o, path + ".oscillator");
      try {
        a.oscillator.params.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ".oscillator: " + e.what());
      }
      c.agents.push_back(a);
    }
  }

  if (const Json* s = top.object("sensors")) {
    Fields f(*s, "sensors");
    f.get("scan_every", c.scan_every);
    if (const Json* l = f.object("lidar")) {
      Fields lf(*l, "sensors.lidar");
      lf.get("beam_count", c.lidar.beam_count);
      lf.get("fov", c.lidar.fov);
      lf.get("max_range", c.lidar.max_range);
      lf.get("mount_offset", c.lidar.mount_offset);
    }
    if (const Json* o = f.object("odometry")) {
      Fields of(*o, "sensors.odometry");
      of.get("sigma_xy", c.odometry.sigma_xy);
      of.get("sigma_theta", c.odometry.sigma_theta);
      of.get("seed", c.odometry_seed);
    }
  }
  try {
    c.lidar.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("sensors.lidar: ") + e.what());
  }
  if (c.odometry.sigma_xy < 0.0 || c.odometry.sigma_theta < 0.0)
    throw ConfigError("sensors.odometry: sigmas must be non-negative");
  c.executor.lidar = c.lidar;

  if (const Json* e = top.object("executor")) {
    Fields f(*e, "executor");
    f.get("step_budget", c.executor.step_budget);
    f.get("watchdog_window", c.executor.watchdog_window);
    f.get("max_replans", c.executor.max_replans);
    f.get("catch_radius", c.executor.catch_radius);
    f.get("lookahead", c.executor.gains.lookahead);
    f.get("arrival_radius", c.executor.gains.arrival_radius);
    if (c.executor.step_budget <= 0) throw ConfigError("'executor.step_budget' must be positive");
  }

  if (const Json* p = top.object("planner")) {
    Fields f(*p, "planner");
    f.get("mode", c.planner);
    if (c.planner != "stub" && c.planner != "llm" && c.planner != "none")
      throw ConfigError("'planner.mode' must be stub, llm or none");
    f.get("command", c.command);
    if (const Json* l = f.object("llm")) {
      Fields lf(*l, "planner.llm");
      lf.get("url", c.llm.url);
      lf.get("model", c.llm.model);
      lf.get("token_env", c.llm.token_env);
      lf.get("timeout_s", c.llm.timeout_s);
    }
  }

  if (const Json* o = top.object("outputs")) {
    Fields f(*o, "outputs");
    f.get("trace", c.trace_path);
    f.get("metrics", c.metrics_path);
  }

  if (const Json* b = top.object("bridge")) {
    Fields f(*b, "bridge");
    f.get("enabled", c.bridge_enabled);
    f.get("port", c.bridge.port);
    f.get("bind", c.bridge.bind_address);
    f.get("static_dir", c.bridge.static_dir);
    f.get("realtime_factor", c.realtime_factor);
    if (c.bridge.port < 0 || c.bridge.port > 65535) throw ConfigError("'bridge.port' out of range");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Trajectories

TrajectoryLog generate_pentagon_reference(double side, double v, double dt) {
  if (!(side > 0.0) || !(v > 0.0) || !(dt > 0.0)) throw std::invalid_argument("pentagon: side, v and dt must be > 0");
  constexpr double turn = 2.0 * std::numbers::pi / 5.0;
  std::array<Vec2, 6> vertices;
  vertices[0] = {0.0, 0.0};
  for (int i = 0; i < 5; ++i) vertices[i + 1] = vertices[i] + unit_vector(i * turn) * side;
  vertices[5] = vertices[0];

  const double total_time = 5.0 * side / v;
  auto sample = [&](double t) {
    const double s = std::min(v * t, 5.0 * side);
    const int edge = std::min(4, static_cast<int>(std::floor(s / side)));
    const double along = s - edge * side;
    const Vec2 p = vertices[edge] + (vertices[edge + 1] - vertices[edge]) * (along / side);
    return TrajectorySample{t, {p.x, p.y, normalize_angle(edge * turn)}};
  };
  TrajectoryLog log;
  const auto steps = static_cast<std::uint64_t>(std::floor(total_time / dt + 1e-9));
  for (std::uint64_t k = 0; k <= steps; ++k) log.push_back(sample(static_cast<double>(k) * dt));
  if (total_time - log.back().t > 1e-12) log.push_back(sample(total_time));
  // The closing vertex is the start point exactly.
  log.back().pose.x = vertices[0].x;
  log.back().pose.y = vertices[0].y;
  return log;
}

TrajectoryLog run_oscillator_trajectory(const OscillatorParams& params, double v, double duration, double dt) {
  params.validate();
  if (!(duration > 0.0) || !(dt > 0.0)) throw std::invalid_argument("oscillator run: duration and dt must be > 0");
  const auto steps = static_cast<std::uint64_t>(std::llround(duration / dt));
  TrajectoryLog log;
  log.reserve(steps + 1);
  Pose pose;
  log.push_back({0.0, pose});
  for (std::uint64_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    pose = integrate_step(pose, {v, oscillatory_omega(params, t)}, dt);
    log.push_back({static_cast<double>(k + 1) * dt, pose});
  }
  return log;
}

std::vector<Vec2> resample_by_arc_length(const TrajectoryLog& log, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("resample: step must be > 0");
  std::vector<Vec2> out;
  if (log.empty()) return out;
  Vec2 prev{log[0].pose.x, log[0].pose.y};
  out.push_back(prev);
  double next_s = step;  // arc length of the next output point
  double s = 0.0;        // arc length at prev
  for (std::size_t i = 1; i < log.size(); ++i) {
    const Vec2 cur{log[i].pose.x, log[i].pose.y};
    const double len = distance(prev, cur);
    while (len > 0.0 && next_s <= s + len) {
      out.push_back(prev + (cur - prev) * ((next_s - s) / len));
      next_s += step;
    }
    s += len;
    prev = cur;
  }
  const Vec2 last{log.back().pose.x, log.back().pose.y};
  if (distance(out.back(), last) > 1e-12) out.push_back(last);
  return out;
}

namespace {

// Uniform bucket grid over the segments of a polyline.
class SegmentGrid {
 public:
  explicit SegmentGrid(const std::vector<Vec2>& pts) : pts_(pts) {
    lo_ = hi_ = pts.front();
    for (const auto& p : pts) {
      lo_.x = std::min(lo_.x, p.x);
      lo_.y = std::min(lo_.y, p.y);
      hi_.x = std::max(hi_.x, p.x);
      hi_.y = std::max(hi_.y, p.y);
    }
    cell_ = std::max({0.05, (hi_.x - lo_.x) / 512.0, (hi_.y - lo_.y) / 512.0});
    nx_ = static_cast<int>((hi_.x - lo_.x) / cell_) + 1;
    ny_ = static_cast<int>((hi_.y - lo_.y) / cell_) + 1;
    buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const int x0 = cx(std::min(pts[i].x, pts[i + 1].x)), x1 = cx(std::max(pts[i].x, pts[i + 1].x));
      const int y0 = cy(std::min(pts[i].y, pts[i + 1].y)), y1 = cy(std::max(pts[i].y, pts[i + 1].y));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) buckets_[static_cast<std::size_t>(y) * nx_ + x].push_back(i);
    }
  }

  double nearest(Vec2 p) const {
    const int px = static_cast<int>(std::floor((p.x - lo_.x) / cell_));
    const int py = static_cast<int>(std::floor((p.y - lo_.y) / cell_));
    const int max_r = std::max({std::abs(px), std::abs(px - (nx_ - 1)), std::abs(py), std::abs(py - (ny_ - 1))});
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= max_r; ++r) {
      auto visit = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= nx_ || y >= ny_) return;
        for (const std::size_t i : buckets_[static_cast<std::size_t>(y) * nx_ + x])
          best = std::min(best, point_segment_distance(p, {pts_[i], pts_[i + 1]}));
      };
      if (r == 0) {
        visit(px, py);
      } else {
        for (int x = std::max(px - r, 0); x <= std::min(px + r, nx_ - 1); ++x) {
          visit(x, py - r);
          visit(x, py + r);
        }
        for (int y = std::max(py - r + 1, 0); y <= std::min(py + r - 1, ny_ - 1); ++y) {
          visit(px - r, y);
          visit(px + r, y);
        }
      }
      // Cells beyond ring r are at least r cells away from p's cell.
      if (best <= r * cell_) break;
    }
    return best;
  }

 private:
  int cx(double x) const { return std::clamp(static_cast<int>((x - lo_.x) / cell_), 0, nx_ - 1); }
  int cy(double y) const { return std::clamp(static_cast<int>((y - lo_.y) / cell_), 0, ny_ - 1); }

  const std::vector<Vec2>& pts_;
  Vec2 lo_, hi_;
  double cell_{0.05};
  int nx_{1}, ny_{1};
  std::vector<std::vector<std::size_t>> buckets_;
};

std::pair<double, double> directed_error(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  const SegmentGrid grid(b);
  double sum = 0.0, max_dev = 0.0;
  for (const auto& p : a) {
    const double d = grid.nearest(p);
    sum += d * d;
    max_dev = std::max(max_dev, d);
  }
  return {std::sqrt(sum / static_cast<double>(a.size())), max_dev};
}

void check_log(const TrajectoryLog& log, const char* name) {
  if (log.size() < 2) throw std::invalid_argument(std::string("path error: log '") + name + "' has fewer than 2 samples");
}

}  // namespace

PathMetrics compute_path_error(const TrajectoryLog& a, const TrajectoryLog& b) {
  check_log(a, "a");
  check_log(b, "b");
  const auto ra = resample_by_arc_length(a);
  const auto rb = resample_by_arc_length(b);
  if (ra.size() < 2 || rb.size() < 2) throw std::invalid_argument("path error: a log has zero length");
  PathMetrics m;
  std::tie(m.rmse, m.max_dev) = directed_error(ra, rb);
  const auto [back_rmse, back_max] = directed_error(rb, ra);
  m.symmetric_rmse = std::max(m.rmse, back_rmse);
  m.symmetric_max_dev = std::max(m.max_dev, back_max);
  m.endpoint = distance({a.back().pose.x, a.back().pose.y}, {b.back().pose.x, b.back().pose.y});
  return m;
}

TrajectoryLog offset_polyline(const TrajectoryLog& log, double d) {
  if (log.size() < 2) return log;
  std::vector<Vec2> pts;
  for (const auto& s : log) pts.push_back({s.pose.x, s.pose.y});
  const bool closed = distance(pts.front(), pts.back()) < 1e-9;
  const std::size_t n = pts.size();

  // Unit direction of the first non-degenerate segment found walking from
  // segment `start` in steps of `step` (+1 forward, -1 backward).
  const std::ptrdiff_t segs = static_cast<std::ptrdiff_t>(n) - 1;
  auto direction = [&](std::ptrdiff_t start, std::ptrdiff_t step) -> std::optional<Vec2> {
    for (std::ptrdiff_t k = 0; k < segs; ++k) {
      std::ptrdiff_t j = start + k * step;
      if (j < 0 || j >= segs) {
        if (!closed) return std::nullopt;
        j = ((j % segs) + segs) % segs;
      }
      const Vec2 e = pts[j + 1] - pts[j];
      if (norm(e) > 1e-12) return e * (1.0 / norm(e));
    }
    return std::nullopt;
  };
  auto dir_before = [&](std::size_t i) { return direction(static_cast<std::ptrdiff_t>(i) - 1, -1); };
  auto dir_after = [&](std::size_t i) { return direction(static_cast<std::ptrdiff_t>(i), +1); };

  TrajectoryLog out = log;
  for (std::size_t i = 0; i < n; ++i) {
    auto in = dir_before(i);
    auto outd = dir_after(i);
    if (!in) in = outd;
    if (!outd) outd = in;
    if (!in) continue;
    const Vec2 n1{-in->y, in->x};
    const Vec2 n2{-outd->y, outd->x};
    const double denom = 1.0 + dot(n1, n2);
    const Vec2 shift = denom > 1e-9 ? (n1 + n2) * (d / denom) : n1 * d;
    out[i].pose.x = pts[i].x + shift.x;
    out[i].pose.y = pts[i].y + shift.y;
  }
  if (closed) {
    out.back().pose.x = out.front().pose.x;
    out.back().pose.y = out.front().pose.y;
  }
  return out;
}

PathMetrics oscillator_fidelity(const OscillatorParams& params, double v, double duration, double dt) {
  const auto coarse = run_oscillator_trajectory(params, v, duration, dt);
  const auto fine = run_oscillator_trajectory(params, v, duration, dt / 100.0);
  return compute_path_error(coarse, fine);
}

// ---------------------------------------------------------------------------
// Scenario runner

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

struct Failure {
  ExitCode code;
  std::string message;
};

}  // namespace

ExitReport run_scenario(const ScenarioConfig& config) {
  ExitReport report;
  auto fail = [&](ExitCode code, std::string message) {
    report.code = code;
    report.message = std::move(message);
    report.metrics["exit_code"] = std::to_string(static_cast<int>(code));
    return report;
  };

  WorldState world;
  try {
    world = generate_environment(config.environment, config.generation);
  } catch (const GenerationError& e) {
    return fail(ExitCode::Generation, e.what());
  }

  Simulation sim(world, config.executor);
  std::vector<std::string> modes(world.agents.size(), "external");
  std::optional<PlannerResponse> planned;
  for (std::size_t i = 0; i < config.agents.size(); ++i) {
    if (i >= world.agents.size())
      return fail(ExitCode::Config, "agents." + std::to_string(i) + " has no agent in the world");
    const auto& a = config.agents[i];
    const int id = static_cast<int>(i);
    modes[i] = a.mode;
    if (a.mode == "oscillator") {
      sim.set_oscillator(id, a.oscillator);
    } else if (a.mode == "plan") {
      Plan plan;
      if (!a.plan.empty()) {
        try {
          plan = parse_plan(a.plan);
        } catch (const PlanError& e) {
          return fail(ExitCode::PlanFailure, "agents." + std::to_string(i) + ".plan: " + std::string(to_string(e.kind())) +
                                                 " at offset " + std::to_string(e.offset()) + ": " + e.what());
        }
        const auto v = validate_plan(plan, world);
        if (!v.ok()) return fail(ExitCode::PlanFailure, "agents." + std::to_string(i) + ".plan: " + v.summary());
      } else {
        try {
          if (config.planner == "stub") {
            planned = stub_plan(world, parse_command(config.command));
          } else if (config.planner == "llm") {
            HttpTransport transport;
            planned = llm_plan({render_environment_description(world), config.command}, world, config.llm, transport);
          } else {
            return fail(ExitCode::Config, "agents." + std::to_string(i) + " has no plan and planner.mode is none");
          }
        } catch (const PlannerError& e) {
          return fail(ExitCode::Planner, std::string(to_string(e.kind())) + ": " + e.what());
        }
        plan = planned->plan;
      }
      sim.start_plan(id, std::move(plan));
    }
  }

  const bool only_plans =
      std::all_of(modes.begin(), modes.end(), [](const std::string& m) { return m == "plan"; }) && !modes.empty();
  std::optional<std::uint64_t> limit = config.duration_ticks;
  if (config.duration_s) limit = static_cast<std::uint64_t>(std::llround(*config.duration_s / config.generation.dt));
  if (!limit && !only_plans) return fail(ExitCode::Config, "a duration is required unless every agent runs a plan");

  std::unique_ptr<Broker> broker;
  std::unique_ptr<BridgeServer> server;
  std::unique_ptr<SimNode> node;
  if (config.bridge_enabled) {
    broker = std::make_unique<Broker>();
    SimNodeConfig nc;
    nc.generation = config.generation;
    nc.lidar = config.lidar;
    nc.odometry_noise = config.odometry;
    nc.noise_seed = config.odometry_seed;
    nc.scan_every = config.scan_every;
    nc.planner = config.planner;
    nc.llm = config.llm;
    node = std::make_unique<SimNode>(*broker, std::move(sim), config.environment, nc);
    server = std::make_unique<BridgeServer>(*broker, config.bridge);
    try {
      server->start();
    } catch (const std::runtime_error& e) {
      return fail(ExitCode::Config, e.what());
    }
  }
  auto current = [&]() -> const Simulation& { return node ? node->sim() : sim; };

  std::ostringstream trace;
  trace << current().trace_record({}).dump() << '\n';
  std::uint64_t ticks = 0;
  std::map<std::string, std::uint64_t> event_counts;
  std::vector<TrajectoryLog> paths(world.agents.size());
  auto record_paths = [&] {
    const auto& w = current().world();
    for (const auto& a : w.agents) paths[a.id].push_back({w.clock.time(), a.pose});
  };
  record_paths();
  auto next_wall = std::chrono::steady_clock::now();
  while (true) {
    if (limit && ticks >= *limit) break;
    if (only_plans && !current().plans_running()) break;
    std::vector<Event> events = node ? node->step() : sim.step();
    ++ticks;
    for (const auto& e : events) {
      std::string key = "events." + std::string(to_string(e.kind));
      if (e.kind == EventKind::Drop) key += "." + e.detail;
      ++event_counts[key];
    }
    trace << (node ? node->last_record() : sim.trace_record(events)).dump() << '\n';
    record_paths();
    if (node && config.realtime_factor > 0.0) {
      next_wall += std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(config.generation.dt / config.realtime_factor));
      std::this_thread::sleep_until(next_wall);
    }
  }
  if (server) server->stop();

  const Simulation& final_sim = current();
  report.ticks = ticks;
  auto& m = report.metrics;
  m["ticks"] = std::to_string(ticks);
  m["sim_time"] = fmt(final_sim.world().clock.time());
  m["seed"] = std::to_string(config.environment.seed);
  for (const auto& [k, v] : event_counts) m[k] = std::to_string(v);
  if (planned) m["planner.call_text"] = planned->call_text;

  bool any_failed = false, any_running = false;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string prefix = "agent." + std::to_string(i) + ".";
    m[prefix + "mode"] = modes[i];
    const auto& pose = final_sim.world().agents[i].pose;
    m[prefix + "final_x"] = fmt(pose.x);
    m[prefix + "final_y"] = fmt(pose.y);
    if (const PlanRunner* r = final_sim.runner(static_cast<int>(i))) {
      const auto& calls = r->calls();
      const auto done = std::count_if(calls.begin(), calls.end(), [](const CallRecord& c) { return c.phase == Phase::Done; });
      m[prefix + "calls_total"] = std::to_string(r->plan().calls.size());
      m[prefix + "calls_done"] = std::to_string(done);
      const std::string status = r->failed() ? "failed" : r->finished() ? "done" : "running";
      m[prefix + "status"] = status;
      if (r->failed()) {
        any_failed = true;
        m[prefix + "failed_call"] = render_call(calls.back().call);
        m[prefix + "reason"] = calls.back().reason;
      }
      if (!r->finished()) any_running = true;
    }
    if (modes[i] == "oscillator" && paths[i].size() >= 2) {
      const auto& osc = config.agents[i].oscillator;
      auto fine = run_oscillator_trajectory(osc.params, osc.linear, final_sim.world().clock.time(),
                                            config.generation.dt / 100.0);
      const Pose start = paths[i].front().pose;
      for (auto& s : fine) {
        const double c = std::cos(start.theta), sn = std::sin(start.theta);
        const double x = s.pose.x, y = s.pose.y;
        s.pose = {start.x + c * x - sn * y, start.y + sn * x + c * y, normalize_angle(s.pose.theta + start.theta)};
      }
      try {
        const auto e = compute_path_error(paths[i], fine);
        m[prefix + "path_rmse"] = fmt(e.rmse);
        m[prefix + "path_max_dev"] = fmt(e.max_dev);
        m[prefix + "path_endpoint"] = fmt(e.endpoint);
      } catch (const std::invalid_argument&) {
      }
    }
  }
  for (const auto& b : final_sim.world().balls) {
    bool inside = false;
    for (const auto& z : final_sim.world().zones) inside = inside || (!b.carried_by && z.contains(b.position));
    m["ball." + std::to_string(b.id) + ".in_zone"] = inside ? "true" : "false";
  }

  if (any_failed) {
    report.code = ExitCode::PlanFailure;
    report.message = "a plan failed";
  } else if (any_running) {
    report.code = ExitCode::Timeout;
    report.message = "duration ended with plans still running";
  } else {
    report.message = "ok";
  }
  m["exit_code"] = std::to_string(static_cast<int>(report.code));

  try {
    if (!config.trace_path.empty()) write_file(config.trace_path, trace.str());
    if (!config.metrics_path.empty()) {
      std::ostringstream os;
      for (const auto& [k, v] : m) os << k << '=' << v << '\n';
      write_file(config.metrics_path, os.str());
    }
  } catch (const std::exception& e) {
    return fail(ExitCode::Config, std::string("cannot write outputs: ") + e.what());
  }
  return report;
}

}  // namespace procnav
