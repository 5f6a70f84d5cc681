#include "procnav/procgen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <string>

#include "procnav/rng.hpp"

namespace procnav {

int AreaSpec::item_count() const {
  int n = obstacle_count + agents;
  for (const auto& [_, c] : balls) n += c;
  for (const auto& [_, c] : zones) n += c;
  return n;
}

void validate_spec(const EnvironmentSpec& spec) {
  using K = GenerationError::Kind;
  if (spec.areas.empty()) throw GenerationError(K::InvalidSpec, "spec has no areas");
  if (!(spec.cell_size > 0.0) || !std::isfinite(spec.cell_size))
    throw GenerationError(K::InvalidSpec, "cell_size must be > 0");
  for (std::size_t i = 0; i < spec.areas.size(); ++i) {
    const auto& a = spec.areas[i];
    const std::string where = "area " + std::to_string(i + 1) + ": ";
    if (a.width_cells < 3 || a.height_cells < 3)
      throw GenerationError(K::InvalidSpec, where + "width and height must be >= 3 cells");
    if (a.obstacle_count < 0 || a.agents < 0)
      throw GenerationError(K::InvalidSpec, where + "negative count");
    for (const auto* items : {&a.balls, &a.zones})
      for (const auto& [_, c] : *items)
        if (c < 0) throw GenerationError(K::InvalidSpec, where + "negative count");
    if (2 * a.item_count() > a.width_cells * a.height_cells)
      throw GenerationError(K::InvalidSpec, where + "items exceed half of the cells");
  }
}

namespace {

using K = GenerationError::Kind;

struct PlacedItem {
  Circle disc;
};

struct Placement {
  GridLayout layout;
  std::vector<Obstacle> obstacles;
  std::vector<Zone> zones;
  std::vector<Ball> balls;
  std::vector<Agent> agents;
};

GridLayout base_layout(const EnvironmentSpec& spec) {
  GridLayout g;
  g.cell_size = spec.cell_size;
  int x = 0;
  for (const auto& a : spec.areas) {
    g.areas.push_back({x, 0, a.width_cells, a.height_cells});
    x += a.width_cells + 1;
    g.height = std::max(g.height, a.height_cells);
  }
  g.width = x - 1;
  g.cells.assign(static_cast<std::size_t>(g.width) * g.height, CellKind::Wall);
  g.area_of.assign(g.cells.size(), -1);
  for (std::size_t i = 0; i < g.areas.size(); ++i) {
    const auto& ac = g.areas[i];
    for (int cy = ac.y0; cy < ac.y0 + ac.height; ++cy)
      for (int cx = ac.x0; cx < ac.x0 + ac.width; ++cx) {
        g.at({cx, cy}) = CellKind::Free;
        g.area_of[g.index({cx, cy})] = static_cast<int>(i);
      }
  }

  const int n = static_cast<int>(spec.areas.size());
  auto open_passage = [&](int i, CellIndex local, CellKind kind) {
    const auto& ac = g.areas[i];
    const std::string where = "area " + std::to_string(i + 1) + " cell (" +
                              std::to_string(local.x) + "," + std::to_string(local.y) + ")";
    if (local.y < 0 || local.y >= ac.height || local.x < 0 || local.x >= ac.width)
      throw GenerationError(K::BadBoundary, where + " is outside the area");
    int wall_x = 0;
    CellIndex neighbor;
    if (local.x == ac.width - 1 && i + 1 < n && local.y < g.areas[i + 1].height) {
      wall_x = ac.x0 + ac.width;
      neighbor = {g.areas[i + 1].x0, local.y};
    } else if (local.x == 0 && i > 0 && local.y < g.areas[i - 1].height) {
      wall_x = ac.x0 - 1;
      neighbor = {g.areas[i - 1].x0 + g.areas[i - 1].width - 1, local.y};
    } else {
      throw GenerationError(K::BadBoundary, where + " is not on a shared boundary");
    }
    const CellIndex own{ac.x0 + local.x, ac.y0 + local.y};
    const CellKind opposite = kind == CellKind::Entry ? CellKind::Exit : CellKind::Entry;
    g.at(own) = kind;
    g.at({wall_x, local.y}) = CellKind::Passage;
    if (g.at(neighbor) == CellKind::Free) g.at(neighbor) = opposite;
  };
  for (int i = 0; i < n; ++i) {
    for (const auto& c : spec.areas[i].entries) open_passage(i, c, CellKind::Entry);
    for (const auto& c : spec.areas[i].exits) open_passage(i, c, CellKind::Exit);
  }
  return g;
}

double shape_box_distance(const Obstacle& o, const Box& b) {
  return o.shape == Obstacle::Shape::Rect ? rect_rect_distance(o.rect(), b.as_rect())
                                          : circle_rect_distance(o.circle(), b.as_rect());
}

double shape_disc_distance(const Obstacle& o, const Circle& c) {
  return o.shape == Obstacle::Shape::Rect ? circle_rect_distance(c, o.rect())
                                          : circle_circle_distance(c, o.circle());
}

double bounding_radius(const Obstacle& o) {
  return o.shape == Obstacle::Shape::Rect ? norm(o.half_extents) : o.radius;
}

class AreaPlacer {
 public:
  AreaPlacer(Placement& out, const AreaSpec& spec, int area, const GenerationOptions& opt, Rng& rng)
      : out_(out), spec_(spec), area_(area), opt_(opt), rng_(rng) {
    const auto& ac = out_.layout.areas[area_];
    const double cs = out_.layout.cell_size;
    bounds_ = {{ac.x0 * cs, ac.y0 * cs}, {(ac.x0 + ac.width) * cs, (ac.y0 + ac.height) * cs}};
  }

  bool attempt() {
    const double cs = out_.layout.cell_size;
    for (int k = 0; k < spec_.obstacle_count; ++k)
      if (!place_obstacle()) return false;
    for (const auto& [color, count] : spec_.zones)
      for (int k = 0; k < count; ++k)
        if (!place_disc(CellKind::Zone, opt_.zone_radius * cs, color)) return false;
    for (const auto& [color, count] : spec_.balls)
      for (int k = 0; k < count; ++k)
        if (!place_disc(CellKind::Ball, opt_.ball_radius * cs, color)) return false;
    for (int k = 0; k < spec_.agents; ++k)
      if (!place_disc(CellKind::Agent, opt_.params.robot_radius, Color::Red)) return false;
    return area_connected();
  }

 private:
  std::vector<CellIndex> free_cells() const {
    const auto& g = out_.layout;
    const auto& ac = g.areas[area_];
    std::vector<CellIndex> cells;
    for (int y = ac.y0; y < ac.y0 + ac.height; ++y)
      for (int x = ac.x0; x < ac.x0 + ac.width; ++x)
        if (g.at({x, y}) == CellKind::Free) cells.push_back({x, y});
    return cells;
  }

  Vec2 jittered_center(CellIndex c, double jitter) {
    const double j = jitter * out_.layout.cell_size;
    const Vec2 base = out_.layout.center(c);
    const double dx = rng_.uniform(-j, j);
    const double dy = rng_.uniform(-j, j);
    return {base.x + dx, base.y + dy};
  }

  bool place_obstacle() {
    auto& g = out_.layout;
    const double cs = g.cell_size;
    for (int attempt = 0; attempt < opt_.item_tries; ++attempt) {
      const auto cells = free_cells();
      if (cells.empty()) return false;
      const CellIndex anchor = cells[rng_.uniform_int(cells.size())];
      Obstacle o;
      o.area = area_;
      o.shape = rng_.uniform01() < 0.5 ? Obstacle::Shape::Rect : Obstacle::Shape::Circle;
      const double lo = opt_.obstacle_side_min * cs;
      const double hi = opt_.obstacle_side_max * cs;
      if (o.shape == Obstacle::Shape::Rect) {
        const double sx = rng_.uniform(lo, hi);
        const double sy = rng_.uniform(lo, hi);
        o.half_extents = {sx / 2, sy / 2};
        o.rotation = rng_.uniform(0.0, std::numbers::pi);
      } else {
        o.radius = rng_.uniform(lo, hi) / 2;
        o.rotation = rng_.uniform(0.0, std::numbers::pi);
      }
      o.center = jittered_center(anchor, opt_.obstacle_jitter);

      const double reach = bounding_radius(o) + opt_.obstacle_clearance;
      const int x_lo = static_cast<int>(std::floor((o.center.x - reach) / cs));
      const int x_hi = static_cast<int>(std::floor((o.center.x + reach) / cs));
      const int y_lo = static_cast<int>(std::floor((o.center.y - reach) / cs));
      const int y_hi = static_cast<int>(std::floor((o.center.y + reach) / cs));
      std::vector<CellIndex> footprint;
      bool ok = true;
      for (int y = y_lo; y <= y_hi && ok; ++y)
        for (int x = x_lo; x <= x_hi && ok; ++x) {
          const CellIndex c{x, y};
          if (!g.in_bounds(c)) {
            // Out-of-grid cells are only a problem if the shape comes near them.
            if (shape_box_distance(o, {{x * cs, y * cs}, {(x + 1) * cs, (y + 1) * cs}}) <
                opt_.obstacle_clearance)
              ok = false;
            continue;
          }
          if (shape_box_distance(o, g.box(c)) >= opt_.obstacle_clearance) continue;
          if (g.area(c) != area_ || g.at(c) != CellKind::Free) ok = false;
          footprint.push_back(c);
        }
      if (!ok) continue;
      for (const auto& c : footprint) g.at(c) = CellKind::Obstacle;
      out_.obstacles.push_back(o);
      return true;
    }
    return false;
  }

  bool disc_clear(const Circle& disc) const {
    constexpr double kGap = 1e-9;
    if (disc.center.x - disc.radius < bounds_.min.x + kGap ||
        disc.center.x + disc.radius > bounds_.max.x - kGap ||
        disc.center.y - disc.radius < bounds_.min.y + kGap ||
        disc.center.y + disc.radius > bounds_.max.y - kGap)
      return false;
    for (const auto& o : out_.obstacles)
      if (o.area == area_ && shape_disc_distance(o, disc) <= kGap) return false;
    for (const auto& item : items_)
      if (circle_circle_distance(disc, item.disc) <= kGap) return false;
    return true;
  }

  bool place_disc(CellKind kind, double radius, Color color) {
    auto& g = out_.layout;
    for (int attempt = 0; attempt < opt_.item_tries; ++attempt) {
      const auto cells = free_cells();
      if (cells.empty()) return false;
      const CellIndex cell = cells[rng_.uniform_int(cells.size())];
      const Vec2 center = jittered_center(cell, opt_.item_jitter);
      const Circle disc{center, radius};
      if (!disc_clear(disc)) continue;
      g.at(cell) = kind;
      items_.push_back({disc});
      switch (kind) {
        case CellKind::Zone:
          out_.zones.push_back({static_cast<int>(out_.zones.size()), color, center, radius, area_});
          break;
        case CellKind::Ball:
          out_.balls.push_back({static_cast<int>(out_.balls.size()), color, center, radius, {}});
          break;
        default: {
          const double heading = rng_.uniform(-std::numbers::pi, std::numbers::pi);
          out_.agents.push_back({static_cast<int>(out_.agents.size()),
                                 {center.x, center.y, normalize_angle(heading)},
                                 {},
                                 area_,
                                 {}});
        }
      }
      return true;
    }
    return false;
  }

  // Every interesting cell of the area must sit in one component of the
  // area's walkable cells.
  bool area_connected() const {
    const auto& g = out_.layout;
    const auto& ac = g.areas[area_];
    std::vector<CellIndex> targets;
    for (int y = ac.y0; y < ac.y0 + ac.height; ++y)
      for (int x = ac.x0; x < ac.x0 + ac.width; ++x) {
        const auto k = g.at({x, y});
        if (k != CellKind::Free && k != CellKind::Obstacle) targets.push_back({x, y});
      }
    if (targets.size() < 2) return true;
    std::vector<char> seen(g.cells.size(), 0);
    std::deque<CellIndex> queue{targets.front()};
    seen[g.index(targets.front())] = 1;
    while (!queue.empty()) {
      const CellIndex c = queue.front();
      queue.pop_front();
      for (const CellIndex d : {CellIndex{1, 0}, CellIndex{-1, 0}, CellIndex{0, 1}, CellIndex{0, -1}}) {
        const CellIndex n{c.x + d.x, c.y + d.y};
        if (!ac.contains(n) || g.blocked(n) || seen[g.index(n)]) continue;
        seen[g.index(n)] = 1;
        queue.push_back(n);
      }
    }
    return std::all_of(targets.begin(), targets.end(),
                       [&](CellIndex t) { return seen[g.index(t)] != 0; });
  }

  Placement& out_;
  const AreaSpec& spec_;
  int area_;
  const GenerationOptions& opt_;
  Rng& rng_;
  Box bounds_;
  std::vector<PlacedItem> items_;
};

Placement place(const EnvironmentSpec& spec, const GenerationOptions& opt) {
  validate_spec(spec);
  Placement out;
  out.layout = base_layout(spec);
  for (std::size_t i = 0; i < spec.areas.size(); ++i) {
    Rng rng(Rng::derive_seed(spec.seed, i));
    const Placement before = out;
    bool placed = false;
    for (int attempt = 0; attempt < opt.max_attempts && !placed; ++attempt) {
      out = before;
      AreaPlacer placer(out, spec.areas[i], static_cast<int>(i), opt, rng);
      placed = placer.attempt();
    }
    if (!placed)
      throw GenerationError(K::InfeasiblePlacement,
                            "area " + std::to_string(i + 1) + ": no valid placement after " +
                                std::to_string(opt.max_attempts) + " attempts");
  }
  // Ids are global and equal to the vector index.
  for (std::size_t k = 0; k < out.zones.size(); ++k) out.zones[k].id = static_cast<int>(k);
  for (std::size_t k = 0; k < out.balls.size(); ++k) out.balls[k].id = static_cast<int>(k);
  for (std::size_t k = 0; k < out.agents.size(); ++k) out.agents[k].id = static_cast<int>(k);
  return out;
}

}  // namespace

GridLayout partition_grid(const EnvironmentSpec& spec, const GenerationOptions& options) {
  return place(spec, options).layout;
}

WorldState generate_environment(const EnvironmentSpec& spec, const GenerationOptions& options) {
  Placement p = place(spec, options);
  WorldState w;
  w.seed = spec.seed;
  w.params = options.params;
  w.clock = SimClock(options.dt);
  w.walls = wall_segments(p.layout);
  for (std::size_t i = 0; i < spec.areas.size(); ++i) {
    Area a;
    a.index = static_cast<int>(i);
    a.cells = p.layout.areas[i];
    const double cs = p.layout.cell_size;
    a.bounds = {{a.cells.x0 * cs, a.cells.y0 * cs},
                {(a.cells.x0 + a.cells.width) * cs, (a.cells.y0 + a.cells.height) * cs}};
    for (const auto& [c, _] : spec.areas[i].balls) a.ball_order.push_back(c);
    for (const auto& [c, _] : spec.areas[i].zones) a.zone_order.push_back(c);
    w.areas.push_back(std::move(a));
  }
  w.layout = std::move(p.layout);
  w.obstacles = std::move(p.obstacles);
  w.zones = std::move(p.zones);
  w.balls = std::move(p.balls);
  w.agents = std::move(p.agents);
  return w;
}

namespace {

std::vector<CellIndex> passages_of(const GridLayout& g, int area) {
  const auto& ac = g.areas[area];
  std::vector<CellIndex> out;
  for (const int x : {ac.x0 - 1, ac.x0 + ac.width}) {
    for (int y = ac.y0; y < ac.y0 + ac.height; ++y) {
      const CellIndex c{x, y};
      if (g.in_bounds(c) && g.at(c) == CellKind::Passage) out.push_back(c);
    }
  }
  return out;
}

}  // namespace

ConnectivityReport check_connectivity(const GridLayout& g) {
  ConnectivityReport report;
  constexpr CellIndex kSteps[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int area = 0; area < static_cast<int>(g.areas.size()); ++area) {
    const auto& ac = g.areas[area];
    std::vector<CellIndex> agents;
    std::vector<CellIndex> targets;
    for (int y = ac.y0; y < ac.y0 + ac.height; ++y)
      for (int x = ac.x0; x < ac.x0 + ac.width; ++x) {
        const auto k = g.at({x, y});
        if (k == CellKind::Agent) agents.push_back({x, y});
        if (k == CellKind::Ball || k == CellKind::Zone) targets.push_back({x, y});
      }
    for (const auto& p : passages_of(g, area)) targets.push_back(p);

    for (const auto& start : agents) {
      std::vector<int> parent(g.cells.size(), -2);
      std::deque<CellIndex> queue{start};
      parent[g.index(start)] = -1;
      while (!queue.empty()) {
        const CellIndex c = queue.front();
        queue.pop_front();
        for (const auto& d : kSteps) {
          const CellIndex n{c.x + d.x, c.y + d.y};
          if (g.blocked(n) || parent[g.index(n)] != -2) continue;
          parent[g.index(n)] = static_cast<int>(g.index(c));
          queue.push_back(n);
        }
      }
      for (const auto& t : targets) {
        if (parent[g.index(t)] == -2) {
          report.connected = false;
          report.unreachable.emplace_back(start, t);
          continue;
        }
        WitnessPath path{start, t, {}};
        for (int i = static_cast<int>(g.index(t)); i != -1; i = parent[i])
          path.cells.push_back({i % g.width, i / g.width});
        std::reverse(path.cells.begin(), path.cells.end());
        report.witnesses.push_back(std::move(path));
      }
    }
  }
  return report;
}

std::vector<Segment> wall_segments(const GridLayout& g) {
  const double cs = g.cell_size;
  auto solid = [&](int x, int y) {
    const CellIndex c{x, y};
    return !g.in_bounds(c) || g.at(c) == CellKind::Wall;
  };
  std::vector<Segment> out;
  // Horizontal edges between rows y-1 and y, merged along x.
  for (int y = 0; y <= g.height; ++y) {
    int run_start = -1;
    for (int x = 0; x <= g.width; ++x) {
      const bool edge = x < g.width && solid(x, y - 1) != solid(x, y);
      if (edge && run_start < 0) run_start = x;
      if (!edge && run_start >= 0) {
        out.push_back({{run_start * cs, y * cs}, {x * cs, y * cs}});
        run_start = -1;
      }
    }
  }
  for (int x = 0; x <= g.width; ++x) {
    int run_start = -1;
    for (int y = 0; y <= g.height; ++y) {
      const bool edge = y < g.height && solid(x - 1, y) != solid(x, y);
      if (edge && run_start < 0) run_start = y;
      if (!edge && run_start >= 0) {
        out.push_back({{x * cs, run_start * cs}, {x * cs, y * cs}});
        run_start = -1;
      }
    }
  }
  return out;
}

}  // namespace procnav
