#include "procnav/executor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <tuple>

namespace procnav {

// ---------------------------------------------------------------------------
// Planning

namespace {

constexpr CellIndex kSteps[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

double polyline_length(const std::vector<Vec2>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
  return len;
}

std::optional<CellIndex> snap_to_free(const GridLayout& g, CellIndex c, Vec2 p) {
  if (!g.blocked(c)) return c;
  std::optional<CellIndex> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const CellIndex n{c.x + dx, c.y + dy};
      if (g.blocked(n)) continue;
      const double d = distance(g.center(n), p);
      if (d < best_d) {
        best_d = d;
        best = n;
      }
    }
  return best;
}

}  // namespace

PathPlan plan_path(const GridLayout& g, Vec2 from, Vec2 to) {
  const auto from_cell = g.cell_of(from);
  const auto to_cell = g.cell_of(to);
  if (!from_cell || !to_cell) throw std::invalid_argument("plan_path: point outside the grid");
  const auto start = snap_to_free(g, *from_cell, from);
  if (!start) throw NoPathError("start cell is enclosed by obstacles");
  const CellIndex goal = *to_cell;
  if (g.blocked(goal)) throw NoPathError("target cell is blocked");

  auto heuristic = [&](CellIndex c) { return std::abs(c.x - goal.x) + std::abs(c.y - goal.y); };
  // (f, h, insertion order) keeps expansion order deterministic.
  using Entry = std::tuple<int, int, std::uint64_t, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::vector<int> cost(g.cells.size(), std::numeric_limits<int>::max());
  std::vector<int> parent(g.cells.size(), -1);
  std::vector<char> closed(g.cells.size(), 0);
  std::uint64_t order = 0;
  const int start_idx = static_cast<int>(g.index(*start));
  cost[start_idx] = 0;
  open.emplace(heuristic(*start), heuristic(*start), order++, start_idx);
  const int goal_idx = static_cast<int>(g.index(goal));
  while (!open.empty()) {
    const auto [f, h, seq, idx] = open.top();
    open.pop();
    if (closed[idx]) continue;
    closed[idx] = 1;
    if (idx == goal_idx) break;
    const CellIndex c{idx % g.width, idx / g.width};
    for (const auto& d : kSteps) {
      const CellIndex n{c.x + d.x, c.y + d.y};
      if (g.blocked(n)) continue;
      const int nidx = static_cast<int>(g.index(n));
      const int ng = cost[idx] + 1;
      if (ng < cost[nidx]) {
        cost[nidx] = ng;
        parent[nidx] = idx;
        open.emplace(ng + heuristic(n), heuristic(n), order++, nidx);
      }
    }
  }
  if (!closed[goal_idx]) throw NoPathError("target is not reachable");

  PathPlan plan;
  for (int idx = goal_idx; idx != -1; idx = parent[idx]) plan.cells.push_back({idx % g.width, idx / g.width});
  std::reverse(plan.cells.begin(), plan.cells.end());
  for (std::size_t i = 0; i + 1 < plan.cells.size(); ++i) plan.waypoints.push_back(g.center(plan.cells[i]));
  plan.waypoints.push_back(to);
  plan.total_length = polyline_length(plan.waypoints);
  return plan;
}

double path_progress(const PathPlan& plan, Vec2 p) {
  const auto& w = plan.waypoints;
  if (w.size() < 2) return 0.0;
  double best_d = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  double s = 0.0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    const Vec2 e = w[i] - w[i - 1];
    const double len = norm(e);
    double u = 0.0;
    if (len > 0.0) u = std::clamp(dot(p - w[i - 1], e) / (len * len), 0.0, 1.0);
    const double d = distance(p, w[i - 1] + e * u);
    if (d < best_d) {
      best_d = d;
      best_s = s + u * len;
    }
    s += len;
  }
  return best_s;
}

double path_remaining(const PathPlan& plan, Vec2 p) {
  if (plan.waypoints.size() < 2) return plan.waypoints.empty() ? 0.0 : distance(p, plan.waypoints.back());
  return std::max(plan.total_length - path_progress(plan, p), 0.0);
}

namespace {

Vec2 point_at(const std::vector<Vec2>& w, double s) {
  for (std::size_t i = 1; i < w.size(); ++i) {
    const double len = distance(w[i - 1], w[i]);
    if (s <= len) return len > 0.0 ? w[i - 1] + (w[i] - w[i - 1]) * (s / len) : w[i];
    s -= len;
  }
  return w.back();
}

}  // namespace

Twist follow_path(const Pose& pose, const PathPlan& plan, const FollowerGains& gains) {
  if (plan.waypoints.empty()) return {};
  const Vec2 pos{pose.x, pose.y};
  if (distance(pos, plan.waypoints.back()) <= gains.arrival_radius) return {};
  const Vec2 target = point_at(plan.waypoints, path_progress(plan, pos) + gains.lookahead);
  const double bearing = std::atan2(target.y - pos.y, target.x - pos.x);
  const double err = normalize_angle(bearing - pose.theta);
  Twist t;
  t.angular = std::clamp(gains.k_theta * err, -gains.max_angular, gains.max_angular);
  // Turn in place until roughly aligned; driving while badly misaligned swings
  // the robot sideways into nearby walls.
  if (std::abs(err) < gains.align_tolerance) t.linear = gains.max_linear * std::cos(err) * std::cos(err);
  return t;
}

// ---------------------------------------------------------------------------
// Behaviors

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Exploring: return "exploring";
    case Phase::Navigating: return "navigating";
    case Phase::Acting: return "acting";
    case Phase::Done: return "done";
    case Phase::Failed: return "failed";
  }
  return "?";
}

BehaviorState BehaviorState::start(const PrimitiveCall& call, const ExecutorOptions& options) {
  BehaviorState s;
  s.active_call = call;
  s.step_budget = options.step_budget;
  return s;
}

std::optional<int> visible_ball(const WorldState& world, int agent_id, Color color, const LidarConfig& lidar) {
  const Agent& agent = world.agent(agent_id);
  const Vec2 pos{agent.pose.x, agent.pose.y};
  std::optional<int> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& b : world.balls) {
    if (b.color != color || b.carried_by) continue;
    const double d = distance(pos, b.position);
    if (d >= lidar.max_range || d >= best_d) continue;
    if (d > 1e-9 && lidar.fov < 2.0 * std::numbers::pi) {
      const double bearing = std::atan2(b.position.y - pos.y, b.position.x - pos.x);
      if (std::abs(normalize_angle(bearing - agent.pose.theta - lidar.mount_offset)) > lidar.fov / 2.0)
        continue;
    }
    if (d > b.radius) {
      const Vec2 dir = (b.position - pos) * (1.0 / d);
      if (cast_ray(world, pos, dir, lidar.max_range, agent_id) < d - b.radius - 1e-6) continue;
    }
    best = b.id;
    best_d = d;
  }
  return best;
}

namespace {

struct Context {
  const WorldState& world;
  const Agent& agent;
  Vec2 pos;
  BehaviorState& state;
  AgentMemory& memory;
  const ExecutorOptions& opt;
};

Decision fail(BehaviorState& s, std::string reason) {
  s.phase = Phase::Failed;
  s.reason = std::move(reason);
  s.path.reset();
  return {};
}

Decision finish(BehaviorState& s, std::optional<Vec2> target, std::string note = {}) {
  s.phase = Phase::Done;
  s.target = target;
  s.reason = std::move(note);
  s.path.reset();
  return {};
}

bool replan(Context& c, Vec2 target) {
  try {
    c.state.path = plan_path(c.world.layout, c.pos, target);
  } catch (const NoPathError& e) {
    fail(c.state, std::string("NoPath: ") + e.what());
    return false;
  }
  c.state.best_remaining = path_remaining(*c.state.path, c.pos);
  c.state.ticks_without_progress = 0;
  return true;
}

// Follows (and if needed plans) a path to target, with the progress watchdog.
Decision navigate(Context& c, Vec2 target) {
  auto& s = c.state;
  s.target = target;
  if (!s.path || distance(s.path->waypoints.back(), target) > 1e-9) {
    if (!replan(c, target)) return {};
  }
  const double remaining = path_remaining(*s.path, c.pos);
  if (remaining < s.best_remaining - 1e-3) {
    s.best_remaining = remaining;
    s.ticks_without_progress = 0;
  } else if (++s.ticks_without_progress >= c.opt.watchdog_window) {
    if (++s.replans > c.opt.max_replans) return fail(s, "NoProgress: watchdog exhausted replans");
    if (!replan(c, target)) return {};
  }
  FollowerGains gains = c.opt.gains;
  gains.max_linear = std::min(gains.max_linear, c.world.params.limits.max_linear);
  gains.max_angular = std::min(gains.max_angular, c.world.params.limits.max_angular);
  return {follow_path(c.agent.pose, *s.path, gains), std::nullopt};
}

std::vector<char> reachable_cells(const GridLayout& g, Vec2 from) {
  std::vector<char> seen(g.cells.size(), 0);
  const auto cell = g.cell_of(from);
  if (!cell) return seen;
  const auto start = snap_to_free(g, *cell, from);
  if (!start) return seen;
  std::deque<CellIndex> queue{*start};
  seen[g.index(*start)] = 1;
  while (!queue.empty()) {
    const CellIndex cur = queue.front();
    queue.pop_front();
    for (const auto& d : kSteps) {
      const CellIndex n{cur.x + d.x, cur.y + d.y};
      if (g.blocked(n) || seen[g.index(n)]) continue;
      seen[g.index(n)] = 1;
      queue.push_back(n);
    }
  }
  return seen;
}

// Row-major sweep over unvisited reachable cells.
Decision explore(Context& c, std::string_view what) {
  auto& s = c.state;
  const auto& g = c.world.layout;
  s.phase = Phase::Exploring;
  if (s.frontier && (c.memory.visited.count(*s.frontier) ||
                     distance(c.pos, g.center(*s.frontier)) <= c.opt.gains.arrival_radius)) {
    c.memory.visited.insert(*s.frontier);
    s.frontier.reset();
    s.path.reset();
  }
  if (!s.frontier) {
    const auto reach = reachable_cells(g, c.pos);
    for (int y = 0; y < g.height && !s.frontier; ++y)
      for (int x = 0; x < g.width && !s.frontier; ++x) {
        const CellIndex cell{x, y};
        if (reach[g.index(cell)] && !c.memory.visited.count(cell)) s.frontier = cell;
      }
    if (!s.frontier) return fail(s, "NotFound: no " + std::string(what) + " after full coverage");
    s.path.reset();
    s.replans = 0;
  }
  Decision d = navigate(c, g.center(*s.frontier));
  if (s.phase == Phase::Navigating) s.phase = Phase::Exploring;
  return d;
}

std::optional<int> pick_zone(const WorldState& w, const Agent& agent, Color color) {
  std::optional<int> any;
  for (const auto& z : w.zones) {
    if (z.color != color) continue;
    if (z.area == agent.area) return z.id;
    if (!any) any = z.id;
  }
  return any;
}

}  // namespace

Decision execute_primitive(const PrimitiveCall& call, const WorldState& world, int agent_id,
                           BehaviorState& s, AgentMemory& memory, const ExecutorOptions& opt) {
  if (is_terminal(s.phase)) return {};
  const Agent& agent = world.agent(agent_id);
  Context c{world, agent, {agent.pose.x, agent.pose.y}, s, memory, opt};
  if (const auto cell = world.layout.cell_of(c.pos)) memory.visited.insert(*cell);
  if (s.step_budget <= 0) return fail(s, "StepBudgetExhausted");
  if (static_cast<int>(call.args.size()) != arity(call.name)) return fail(s, "ArityMismatch");

  switch (call.name) {
    case Primitive::SearchBall: {
      const Color color = call.args[0];
      if (auto it = memory.known_balls.find(color); it != memory.known_balls.end()) {
        const Ball& b = world.balls.at(it->second);
        if (!b.carried_by || *b.carried_by == agent_id) return finish(s, b.position);
        memory.known_balls.erase(it);
      }
      if (const auto id = visible_ball(world, agent_id, color, opt.lidar)) {
        memory.known_balls[color] = *id;
        return finish(s, world.balls[*id].position);
      }
      return explore(c, std::string(to_string(color)) + " ball");
    }
    case Primitive::CatchTheBall: {
      const Color color = call.args[0];
      if (agent.carried_ball) {
        if (s.mutation_pending && world.balls[*agent.carried_ball].color == color)
          return finish(s, world.balls[*agent.carried_ball].position);
        return fail(s, "AlreadyCarrying");
      }
      const auto it = memory.known_balls.find(color);
      if (it == memory.known_balls.end()) return fail(s, "CatchBeforeLocalization");
      const Ball& ball = world.balls.at(it->second);
      if (ball.carried_by) return fail(s, "BallTaken");
      if (distance(c.pos, ball.position) <= opt.catch_radius) {
        s.phase = Phase::Acting;
        s.mutation_pending = true;
        return {{}, Mutation{Mutation::Kind::Pickup, agent_id, ball.id}};
      }
      s.phase = Phase::Navigating;
      return navigate(c, ball.position);
    }
    case Primitive::SearchZone: {
      const auto id = pick_zone(world, agent, call.args[0]);
      if (!id) return fail(s, "NotFound: no " + std::string(to_string(call.args[0])) + " zone");
      memory.chosen_zones[call.args[0]] = *id;
      return finish(s, world.zones[*id].center);
    }
    case Primitive::GoToZone: {
      std::optional<int> id;
      if (auto it = memory.chosen_zones.find(call.args[0]); it != memory.chosen_zones.end()) id = it->second;
      if (!id) id = pick_zone(world, agent, call.args[0]);
      if (!id) return fail(s, "NotFound: no " + std::string(to_string(call.args[0])) + " zone");
      const Zone& zone = world.zones[*id];
      if (zone.contains(c.pos) && distance(c.pos, zone.center) <= opt.gains.arrival_radius)
        return finish(s, zone.center);
      s.phase = Phase::Navigating;
      return navigate(c, zone.center);
    }
    case Primitive::LeaveBall: {
      if (s.mutation_pending && !agent.carried_ball) {
        const bool in_zone = std::any_of(world.zones.begin(), world.zones.end(),
                                         [&](const Zone& z) { return z.contains(c.pos); });
        return finish(s, c.pos, in_zone ? "" : "dropped_outside_zone");
      }
      if (!agent.carried_ball) return fail(s, "NotCarrying");
      s.phase = Phase::Acting;
      s.mutation_pending = true;
      return {{}, Mutation{Mutation::Kind::Drop, agent_id, -1}};
    }
  }
  return fail(s, "unknown primitive");
}

// ---------------------------------------------------------------------------
// Plan execution

bool ExecutionTrace::completed() const {
  return !calls.empty() && std::all_of(calls.begin(), calls.end(),
                                       [](const CallRecord& r) { return r.phase == Phase::Done; });
}

PlanRunner::PlanRunner(Plan plan, int agent, ExecutorOptions options)
    : plan_(std::move(plan)), agent_(agent), options_(std::move(options)) {}

bool PlanRunner::finished() const { return failed_ || index_ >= plan_.calls.size(); }

std::optional<Phase> PlanRunner::current_phase() const {
  if (finished() || !opened_) return std::nullopt;
  return state_.phase;
}

void PlanRunner::open_call(std::uint64_t tick) {
  state_ = BehaviorState::start(plan_.calls[index_], options_);
  CallRecord r;
  r.call = plan_.calls[index_];
  r.phase = state_.phase;
  r.start_tick = tick;
  r.end_tick = tick;
  records_.push_back(std::move(r));
  opened_ = true;
}

void PlanRunner::note_phase(std::uint64_t tick) {
  auto& r = records_.back();
  if (r.transitions.empty() || r.transitions.back().phase != state_.phase)
    r.transitions.push_back({tick, state_.phase});
  r.phase = state_.phase;
  r.end_tick = tick;
  r.target = state_.target;
  r.reason = state_.reason;
}

Decision PlanRunner::decide(const WorldState& world) {
  const std::uint64_t tick = world.clock.tick();
  while (!finished()) {
    if (!opened_) open_call(tick);
    Decision d = execute_primitive(plan_.calls[index_], world, agent_, state_, memory_, options_);
    note_phase(tick);
    if (!is_terminal(state_.phase)) return d;
    opened_ = false;
    if (state_.phase == Phase::Failed) {
      failed_ = true;
      break;
    }
    ++index_;
  }
  return {};
}

void PlanRunner::observe(const WorldState& world, const std::vector<Event>& events) {
  if (finished() || !opened_) return;
  auto& r = records_.back();
  for (const auto& e : events)
    if (e.agent == agent_) r.events.push_back(e);
  r.end_tick = world.clock.tick();
  --state_.step_budget;
}

namespace {

TickRecord snapshot(const WorldState& w, const PlanRunner& runner, std::vector<Event> events) {
  TickRecord t;
  t.tick = w.clock.tick();
  t.t = w.clock.time();
  for (const auto& a : w.agents) t.poses.emplace_back(a.id, a.pose);
  if (!runner.calls().empty()) {
    const auto& last = runner.calls().back();
    t.call_index = static_cast<int>(runner.calls().size()) - 1;
    t.call = render_call(last.call);
    t.phase = last.phase;
  }
  t.events = std::move(events);
  return t;
}

}  // namespace

ExecutionTrace run_plan(const Plan& plan, WorldState& world, int agent, const ExecutorOptions& options) {
  (void)world.agent(agent);
  ExecutionTrace trace;
  trace.agent = agent;
  PlanRunner runner(plan, agent, options);
  trace.ticks.push_back(snapshot(world, runner, {}));
  const std::uint64_t first_tick = world.clock.tick();
  while (true) {
    const Decision d = runner.decide(world);
    if (runner.finished()) break;
    std::vector<Mutation> mutations;
    if (d.mutation) mutations.push_back(*d.mutation);
    auto events = advance_world(world, {{agent, d.cmd}}, mutations);
    runner.observe(world, events);
    trace.ticks.push_back(snapshot(world, runner, std::move(events)));
  }
  // Calls closed in the final decide() are not reflected in the last tick record yet.
  if (!trace.ticks.empty() && !runner.calls().empty()) {
    trace.ticks.back().phase = runner.calls().back().phase;
    trace.ticks.back().call_index = static_cast<int>(runner.calls().size()) - 1;
    trace.ticks.back().call = render_call(runner.calls().back().call);
  }
  trace.calls = runner.calls();
  trace.ticks_used = world.clock.tick() - first_tick;
  return trace;
}

}  // namespace procnav
