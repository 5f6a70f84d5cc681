#include "procnav/world.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace procnav {

std::string_view to_string(Color c) {
  switch (c) {
    case Color::Red: return "Red";
    case Color::Green: return "Green";
    case Color::Blue: return "Blue";
    case Color::Orange: return "Orange";
    case Color::Yellow: return "Yellow";
    case Color::Purple: return "Purple";
  }
  return "?";
}

std::optional<Color> parse_color(std::string_view name) {
  for (Color c : kPalette) {
    const auto canon = to_string(c);
    if (canon.size() != name.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < name.size() && same; ++i)
      same = std::tolower(static_cast<unsigned char>(name[i])) ==
             std::tolower(static_cast<unsigned char>(canon[i]));
    if (same) return c;
  }
  return std::nullopt;
}

std::string_view to_string(CellKind k) {
  switch (k) {
    case CellKind::Free: return "free";
    case CellKind::Obstacle: return "obstacle";
    case CellKind::Wall: return "wall";
    case CellKind::Ball: return "ball";
    case CellKind::Zone: return "zone";
    case CellKind::Agent: return "agent";
    case CellKind::Entry: return "entry";
    case CellKind::Exit: return "exit";
    case CellKind::Passage: return "passage";
  }
  return "?";
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Collision: return "collision";
    case EventKind::Clamp: return "clamp";
    case EventKind::ZoneEnter: return "zone_enter";
    case EventKind::Pickup: return "pickup";
    case EventKind::Drop: return "drop";
  }
  return "?";
}

std::optional<CellIndex> GridLayout::cell_of(Vec2 p) const {
  const CellIndex c{static_cast<int>(std::floor(p.x / cell_size)),
                    static_cast<int>(std::floor(p.y / cell_size))};
  if (!in_bounds(c)) return std::nullopt;
  return c;
}

bool Obstacle::contains(Vec2 p) const {
  return shape == Shape::Rect ? point_in_rect(p, rect()) : point_in_circle(p, circle());
}

double Obstacle::distance_to(Vec2 p) const {
  return shape == Shape::Rect ? point_rect_distance(p, rect()) : point_circle_distance(p, circle());
}

double Obstacle::distance_to(const Segment& s) const {
  return shape == Shape::Rect ? segment_rect_distance(s, rect())
                              : segment_circle_distance(s, circle());
}

std::optional<double> Obstacle::raycast(Vec2 origin, Vec2 dir) const {
  return shape == Shape::Rect ? ray_rect(origin, dir, rect()) : ray_circle(origin, dir, circle());
}

UnknownAgentError::UnknownAgentError(int id)
    : std::out_of_range("unknown agent id " + std::to_string(id)), id_(id) {}

const Agent& WorldState::agent(int id) const {
  for (const auto& a : agents)
    if (a.id == id) return a;
  throw UnknownAgentError(id);
}

Agent& WorldState::agent(int id) {
  for (auto& a : agents)
    if (a.id == id) return a;
  throw UnknownAgentError(id);
}

int WorldState::area_at(Vec2 p) const {
  for (const auto& a : areas)
    if (a.bounds.contains(p)) return a.index;
  return -1;
}

namespace {

bool swept_collides(const WorldState& w, const Agent& self, Vec2 from, Vec2 to) {
  const double r = w.params.robot_radius;
  const Segment sweep{from, to};
  for (const auto& wall : w.walls)
    if (segment_segment_distance(sweep, wall) < r) return true;
  for (const auto& o : w.obstacles)
    if (o.distance_to(sweep) < r) return true;
  for (const auto& other : w.agents) {
    if (other.id == self.id) continue;
    if (point_segment_distance({other.pose.x, other.pose.y}, sweep) < 2 * r) return true;
  }
  return false;
}

void apply_mutation(WorldState& w, const Mutation& m, std::vector<Event>& events) {
  Agent& agent = w.agent(m.agent);
  const std::uint64_t tick = w.clock.tick();
  if (m.kind == Mutation::Kind::Pickup) {
    if (m.ball < 0 || m.ball >= static_cast<int>(w.balls.size()))
      throw std::invalid_argument("pickup: unknown ball");
    Ball& ball = w.balls[m.ball];
    if (ball.carried_by) throw std::invalid_argument("pickup: ball already carried");
    if (agent.carried_ball) throw std::invalid_argument("pickup: agent already carrying");
    ball.carried_by = agent.id;
    ball.position = {agent.pose.x, agent.pose.y};
    agent.carried_ball = ball.id;
    events.push_back({EventKind::Pickup, tick, agent.id, ball.id, std::nullopt, ""});
    return;
  }
  if (!agent.carried_ball) throw std::invalid_argument("drop: agent is not carrying");
  Ball& ball = w.balls[*agent.carried_ball];
  ball.carried_by.reset();
  ball.position = {agent.pose.x, agent.pose.y};
  agent.carried_ball.reset();
  Event e{EventKind::Drop, tick, agent.id, ball.id, std::nullopt, "dropped_outside_zone"};
  for (const auto& z : w.zones) {
    if (z.contains(ball.position)) {
      e.zone = z.id;
      e.detail = "inside_zone";
      break;
    }
  }
  events.push_back(std::move(e));
}

}  // namespace

std::vector<Event> advance_world(WorldState& w, const std::map<int, Twist>& commands,
                                 std::span<const Mutation> mutations) {
  for (const auto& [id, _] : commands) (void)w.agent(id);
  for (const auto& m : mutations) (void)w.agent(m.agent);

  std::vector<Event> events;
  const std::uint64_t tick = w.clock.tick();
  for (const auto& m : mutations) apply_mutation(w, m, events);

  const double dt = w.clock.dt();
  // Agents move round-robin in id order; later agents see earlier agents' new poses.
  for (auto& agent : w.agents) {
    Twist cmd{};
    if (auto it = commands.find(agent.id); it != commands.end()) cmd = it->second;
    if (clamp_twist(cmd, w.params.limits))
      events.push_back({EventKind::Clamp, tick, agent.id, std::nullopt, std::nullopt, ""});

    const Pose before = agent.pose;
    const Pose after = integrate_step(before, cmd, dt);
    if (swept_collides(w, agent, {before.x, before.y}, {after.x, after.y})) {
      events.push_back({EventKind::Collision, tick, agent.id, std::nullopt, std::nullopt, ""});
      agent.velocity = {};
    } else {
      for (const auto& z : w.zones) {
        if (!z.contains({before.x, before.y}) && z.contains({after.x, after.y}))
          events.push_back({EventKind::ZoneEnter, tick, agent.id, std::nullopt, z.id, ""});
      }
      agent.pose = after;
      agent.velocity = cmd;
    }
    if (agent.carried_ball) w.balls[*agent.carried_ball].position = {agent.pose.x, agent.pose.y};
  }
  w.clock.advance();
  return events;
}

StepResult step_world(const WorldState& world, const std::map<int, Twist>& commands, double dt,
                      std::span<const Mutation> mutations) {
  if (dt != world.clock.dt()) throw std::invalid_argument("step_world: dt differs from world clock");
  StepResult result{world, {}};
  result.events = advance_world(result.world, commands, mutations);
  return result;
}

bool disc_in_collision(const WorldState& w, Vec2 p, std::optional<int> ignore_agent) {
  const double r = w.params.robot_radius;
  for (const auto& wall : w.walls)
    if (point_segment_distance(p, wall) < r) return true;
  for (const auto& o : w.obstacles)
    if (o.distance_to(p) < r) return true;
  for (const auto& a : w.agents) {
    if (ignore_agent && a.id == *ignore_agent) continue;
    if (distance(p, {a.pose.x, a.pose.y}) < 2 * r) return true;
  }
  return false;
}

}  // namespace procnav
