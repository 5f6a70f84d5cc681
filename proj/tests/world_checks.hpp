#pragma once

// Structural checks of a generated world against its spec: exact counts,
// pairwise disjoint footprints, containment in the area and grid
// reachability. Shapes are compared through dense boundary sampling so the
// check does not reuse the generator's distance routines.

#include <map>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "procnav/procgen.hpp"
#include "procnav/rng.hpp"

namespace oracle {

struct Footprint {
  std::string label;
  std::vector<Vec2> boundary;
  bool is_rect{false};
  Vec2 center;
  Vec2 half;
  double rot{0.0};
  double radius{0.0};

  bool contains(Vec2 p) const { return is_rect ? in_rect(p, center, half, rot) : in_circle(p, center, radius); }
};

inline Footprint disc_fp(std::string label, Vec2 c, double r) {
  return {std::move(label), circle_boundary(c, r, 96), false, c, {}, 0.0, r};
}

inline Footprint obstacle_fp(const procnav::Obstacle& o, std::size_t i) {
  const std::string label = "obstacle " + std::to_string(i);
  if (o.shape == procnav::Obstacle::Shape::Circle) return disc_fp(label, o.center, o.radius);
  return {label, rect_boundary(o.center, o.half_extents, o.rotation, 48), true, o.center, o.half_extents,
          o.rotation, 0.0};
}

inline bool footprints_overlap(const Footprint& a, const Footprint& b) {
  for (const auto& p : a.boundary)
    if (b.contains(p)) return true;
  for (const auto& p : b.boundary)
    if (a.contains(p)) return true;
  return false;
}

inline CellIndex cell_at(const GridLayout& g, Vec2 p) {
  return {static_cast<int>(std::floor(p.x / g.cell_size)), static_cast<int>(std::floor(p.y / g.cell_size))};
}

/// Empty when the world satisfies every check.
inline std::vector<std::string> world_violations(const procnav::WorldState& w, const procnav::EnvironmentSpec& spec) {
  using namespace procnav;
  std::vector<std::string> bad;
  const auto& g = w.layout;
  const double rr = w.params.robot_radius;

  for (std::size_t ai = 0; ai < spec.areas.size(); ++ai) {
    const auto& as = spec.areas[ai];
    const auto& ac = g.areas.at(ai);
    const Vec2 lo{ac.x0 * g.cell_size, ac.y0 * g.cell_size};
    const Vec2 hi{(ac.x0 + ac.width) * g.cell_size, (ac.y0 + ac.height) * g.cell_size};
    auto inside = [&](Vec2 p, double r) {
      return p.x - r >= lo.x && p.x + r <= hi.x && p.y - r >= lo.y && p.y + r <= hi.y;
    };
    const std::string where = "area " + std::to_string(ai) + ": ";

    int obstacles = 0, agents = 0;
    for (const auto& o : w.obstacles) obstacles += o.area == static_cast<int>(ai);
    if (obstacles != as.obstacle_count) bad.push_back(where + "obstacle count");

    std::map<Color, int> balls, zones;
    for (const auto& b : w.balls)
      if (inside(b.position, b.radius)) ++balls[b.color];
    for (const auto& z : w.zones)
      if (z.area == static_cast<int>(ai)) {
        ++zones[z.color];
        if (!inside(z.center, z.radius)) bad.push_back(where + "zone leaves the area");
      }
    for (const auto& [c, n] : as.balls)
      if (balls[c] != n) bad.push_back(where + "ball count for " + std::string(to_string(c)));
    for (const auto& [c, n] : as.zones)
      if (zones[c] != n) bad.push_back(where + "zone count for " + std::string(to_string(c)));
    for (const auto& a : w.agents)
      if (a.area == static_cast<int>(ai)) {
        ++agents;
        if (!inside({a.pose.x, a.pose.y}, rr)) bad.push_back(where + "agent leaves the area");
      }
    if (agents != as.agents) bad.push_back(where + "agent count");

    // Reachability of every item in this area from every agent in it.
    for (const auto& a : w.agents) {
      if (a.area != static_cast<int>(ai)) continue;
      const CellIndex from = cell_at(g, {a.pose.x, a.pose.y});
      std::vector<Vec2> targets;
      for (const auto& b : w.balls)
        if (inside(b.position, b.radius)) targets.push_back(b.position);
      for (const auto& z : w.zones)
        if (z.area == static_cast<int>(ai)) targets.push_back(z.center);
      for (const auto& t : targets)
        if (!bfs_distance(g, from, cell_at(g, t))) bad.push_back(where + "unreachable target");
    }
  }
  if (w.balls.size() != [&] {
        std::size_t n = 0;
        for (const auto& a : spec.areas)
          for (const auto& [_, c] : a.balls) n += c;
        return n;
      }())
    bad.push_back("total ball count");

  std::vector<Footprint> fps;
  for (std::size_t i = 0; i < w.obstacles.size(); ++i) fps.push_back(obstacle_fp(w.obstacles[i], i));
  for (const auto& b : w.balls) fps.push_back(disc_fp("ball " + std::to_string(b.id), b.position, b.radius));
  for (const auto& z : w.zones) fps.push_back(disc_fp("zone " + std::to_string(z.id), z.center, z.radius));
  for (const auto& a : w.agents) fps.push_back(disc_fp("agent " + std::to_string(a.id), {a.pose.x, a.pose.y}, rr));
  for (std::size_t i = 0; i < fps.size(); ++i)
    for (std::size_t j = i + 1; j < fps.size(); ++j)
      if (footprints_overlap(fps[i], fps[j])) bad.push_back(fps[i].label + " overlaps " + fps[j].label);
  return bad;
}

/// Random spec that leaves plenty of room: one to three areas with items
/// well under the placement limit, joined by passages on shared walls.
inline procnav::EnvironmentSpec random_feasible_spec(procnav::Rng& rng) {
  using namespace procnav;
  EnvironmentSpec spec;
  spec.seed = rng.next_u64();
  const int n = 1 + static_cast<int>(rng.uniform_int(3));
  for (int i = 0; i < n; ++i) {
    AreaSpec a;
    a.width_cells = 7 + static_cast<int>(rng.uniform_int(6));
    a.height_cells = 7 + static_cast<int>(rng.uniform_int(6));
    const int cells = a.width_cells * a.height_cells;
    a.obstacle_count = static_cast<int>(rng.uniform_int(cells / 12 + 1));
    std::vector<Color> palette(kPalette.begin(), kPalette.end());
    const int ball_colors = static_cast<int>(rng.uniform_int(3));
    const int zone_colors = 1 + static_cast<int>(rng.uniform_int(2));
    for (int k = 0; k < ball_colors; ++k) {
      const Color c = palette[rng.uniform_int(palette.size())];
      bool dup = false;
      for (const auto& [pc, _] : a.balls) dup |= pc == c;
      if (!dup) a.balls.push_back({c, 1 + static_cast<int>(rng.uniform_int(2))});
    }
    for (int k = 0; k < zone_colors; ++k) {
      const Color c = palette[rng.uniform_int(palette.size())];
      bool dup = false;
      for (const auto& [pc, _] : a.zones) dup |= pc == c;
      if (!dup) a.zones.push_back({c, 1});
    }
    a.agents = static_cast<int>(rng.uniform_int(3));
    spec.areas.push_back(a);
  }
  for (int i = 0; i + 1 < n; ++i) {
    const int h = std::min(spec.areas[i].height_cells, spec.areas[i + 1].height_cells);
    const int y = 1 + static_cast<int>(rng.uniform_int(h - 2));
    spec.areas[i].exits.push_back({spec.areas[i].width_cells - 1, y});
    spec.areas[i + 1].entries.push_back({0, y});
  }
  return spec;
}

}  // namespace oracle
