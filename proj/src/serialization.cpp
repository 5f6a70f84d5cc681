#include "procnav/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace procnav {

namespace {

constexpr char kCellChars[] = {'.', '#', 'W', 'b', 'z', 'a', 'e', 'x', 'p'};

char cell_char(CellKind k) { return kCellChars[static_cast<int>(k)]; }

CellKind cell_from_char(char c) {
  for (int i = 0; i < 9; ++i)
    if (kCellChars[i] == c) return static_cast<CellKind>(i);
  throw std::invalid_argument(std::string("layout: unknown cell character '") + c + "'");
}

Json vec(Vec2 v) { return Json::array({v.x, v.y}); }

Vec2 vec_from(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

Color color_from(const Json& j) {
  const auto c = parse_color(j.get<std::string>());
  if (!c) throw std::invalid_argument("unknown color " + j.dump(-1, ' ', false, Json::error_handler_t::replace));
  return *c;
}

Json color_counts(const std::vector<std::pair<Color, int>>& items) {
  Json o = Json::object();
  for (const auto& [c, n] : items) o[std::string(to_string(c))] = n;
  return o;
}

Json cells(const std::vector<CellIndex>& cs) {
  Json a = Json::array();
  for (const auto& c : cs) a.push_back(Json::array({c.x, c.y}));
  return a;
}

}  // namespace

Json to_json(const Pose& p) { return Json{{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }

Json to_json(const Twist& t) { return Json{{"linear", t.linear}, {"angular", t.angular}}; }

Json to_json(const Event& e) {
  Json j{{"kind", to_string(e.kind)}, {"tick", e.tick}, {"agent", e.agent}};
  if (e.ball) j["ball"] = *e.ball;
  if (e.zone) j["zone"] = *e.zone;
  if (!e.detail.empty()) j["detail"] = e.detail;
  return j;
}

Json to_json(const EnvironmentSpec& spec) {
  Json areas = Json::array();
  for (const auto& a : spec.areas) {
    areas.push_back(Json{{"width", a.width_cells},
                         {"height", a.height_cells},
                         {"obstacles", a.obstacle_count},
                         {"balls", color_counts(a.balls)},
                         {"zones", color_counts(a.zones)},
                         {"agents", a.agents},
                         {"entries", cells(a.entries)},
                         {"exits", cells(a.exits)}});
  }
  return Json{{"seed", spec.seed}, {"cell_size", spec.cell_size}, {"areas", areas}};
}

EnvironmentSpec spec_from_json(const Json& j) {
  using K = GenerationError::Kind;
  try {
    EnvironmentSpec spec;
    if (!j.is_object()) throw std::invalid_argument("spec must be an object");
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.cell_size = j.value("cell_size", 1.0);
    for (const auto& ja : j.at("areas")) {
      AreaSpec a;
      a.width_cells = ja.at("width").get<int>();
      a.height_cells = ja.at("height").get<int>();
      a.obstacle_count = ja.value("obstacles", 0);
      a.agents = ja.value("agents", 0);
      for (const auto* key : {"balls", "zones"}) {
        if (!ja.contains(key)) continue;
        auto& dst = std::string(key) == "balls" ? a.balls : a.zones;
        for (const auto& [name, count] : ja.at(key).items()) {
          const auto c = parse_color(name);
          if (!c) throw std::invalid_argument("unknown color '" + name + "'");
          dst.emplace_back(*c, count.get<int>());
        }
      }
      for (const auto* key : {"entries", "exits"}) {
        if (!ja.contains(key)) continue;
        auto& dst = std::string(key) == "entries" ? a.entries : a.exits;
        for (const auto& c : ja.at(key)) dst.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
      }
      spec.areas.push_back(std::move(a));
    }
    return spec;
  } catch (const GenerationError&) {
    throw;
  } catch (const std::exception& e) {
    throw GenerationError(K::InvalidSpec, std::string("malformed spec: ") + e.what());
  }
}

Json to_json(const GridLayout& g) {
  Json rows = Json::array();
  for (int y = 0; y < g.height; ++y) {
    std::string row;
    for (int x = 0; x < g.width; ++x) row.push_back(cell_char(g.at({x, y})));
    rows.push_back(row);
  }
  Json areas = Json::array();
  for (const auto& a : g.areas) areas.push_back(Json::array({a.x0, a.y0, a.width, a.height}));
  return Json{{"cell_size", g.cell_size}, {"areas", areas}, {"rows", rows}};
}

GridLayout layout_from_json(const Json& j) {
  GridLayout g;
  g.cell_size = j.at("cell_size").get<double>();
  for (const auto& a : j.at("areas"))
    g.areas.push_back({a.at(0).get<int>(), a.at(1).get<int>(), a.at(2).get<int>(), a.at(3).get<int>()});
  const auto& rows = j.at("rows");
  g.height = static_cast<int>(rows.size());
  g.width = g.height > 0 ? static_cast<int>(rows.at(0).get<std::string>().size()) : 0;
  g.cells.reserve(static_cast<std::size_t>(g.width) * g.height);
  for (const auto& r : rows) {
    const auto s = r.get<std::string>();
    if (static_cast<int>(s.size()) != g.width) throw std::invalid_argument("layout: ragged rows");
    for (char c : s) g.cells.push_back(cell_from_char(c));
  }
  g.area_of.assign(g.cells.size(), -1);
  for (std::size_t i = 0; i < g.areas.size(); ++i) {
    const auto& a = g.areas[i];
    for (int y = a.y0; y < a.y0 + a.height; ++y)
      for (int x = a.x0; x < a.x0 + a.width; ++x) {
        if (!g.in_bounds({x, y})) throw std::invalid_argument("layout: area outside grid");
        g.area_of[g.index({x, y})] = static_cast<int>(i);
      }
  }
  return g;
}

Json to_json(const WorldState& w) {
  Json areas = Json::array();
  for (const auto& a : w.areas) {
    Json balls = Json::array();
    Json zones = Json::array();
    for (Color c : a.ball_order) balls.push_back(to_string(c));
    for (Color c : a.zone_order) zones.push_back(to_string(c));
    areas.push_back(Json{{"index", a.index},
                         {"bounds", Json::array({vec(a.bounds.min), vec(a.bounds.max)})},
                         {"ball_order", balls},
                         {"zone_order", zones}});
  }
  Json obstacles = Json::array();
  for (const auto& o : w.obstacles) {
    Json jo{{"shape", o.shape == Obstacle::Shape::Rect ? "rect" : "circle"},
            {"center", vec(o.center)}};
    if (o.shape == Obstacle::Shape::Rect)
      jo["half_extents"] = vec(o.half_extents);
    else
      jo["radius"] = o.radius;
    jo["rotation"] = o.rotation;
    jo["area"] = o.area;
    obstacles.push_back(std::move(jo));
  }
  Json balls = Json::array();
  for (const auto& b : w.balls) {
    Json jb{{"id", b.id}, {"color", to_string(b.color)}, {"position", vec(b.position)}, {"radius", b.radius}};
    jb["carried_by"] = b.carried_by ? Json(*b.carried_by) : Json(nullptr);
    balls.push_back(std::move(jb));
  }
  Json zones = Json::array();
  for (const auto& z : w.zones)
    zones.push_back(Json{{"id", z.id}, {"color", to_string(z.color)}, {"center", vec(z.center)},
                         {"radius", z.radius}, {"area", z.area}});
  Json agents = Json::array();
  for (const auto& a : w.agents) {
    Json ja{{"id", a.id}, {"pose", to_json(a.pose)}, {"velocity", to_json(a.velocity)}, {"area", a.area}};
    ja["carried_ball"] = a.carried_ball ? Json(*a.carried_ball) : Json(nullptr);
    agents.push_back(std::move(ja));
  }
  Json walls = Json::array();
  for (const auto& s : w.walls) walls.push_back(Json::array({s.a.x, s.a.y, s.b.x, s.b.y}));
  return Json{{"seed", w.seed},
              {"robot_radius", w.params.robot_radius},
              {"max_linear", w.params.limits.max_linear},
              {"max_angular", w.params.limits.max_angular},
              {"dt", w.clock.dt()},
              {"tick", w.clock.tick()},
              {"layout", to_json(w.layout)},
              {"areas", areas},
              {"obstacles", obstacles},
              {"balls", balls},
              {"zones", zones},
              {"agents", agents},
              {"walls", walls}};
}

WorldState world_from_json(const Json& j) {
  try {
    WorldState w;
    w.seed = j.at("seed").get<std::uint64_t>();
    w.params.robot_radius = j.at("robot_radius").get<double>();
    w.params.limits.max_linear = j.at("max_linear").get<double>();
    w.params.limits.max_angular = j.at("max_angular").get<double>();
    w.clock = SimClock(j.at("dt").get<double>());
    const auto ticks = j.value("tick", std::uint64_t{0});
    for (std::uint64_t i = 0; i < ticks; ++i) w.clock.advance();
    w.layout = layout_from_json(j.at("layout"));
    for (const auto& ja : j.at("areas")) {
      Area a;
      a.index = ja.at("index").get<int>();
      a.bounds = {vec_from(ja.at("bounds").at(0)), vec_from(ja.at("bounds").at(1))};
      if (a.index < 0 || a.index >= static_cast<int>(w.layout.areas.size()))
        throw std::invalid_argument("area index out of range");
      a.cells = w.layout.areas[a.index];
      for (const auto& c : ja.at("ball_order")) a.ball_order.push_back(color_from(c));
      for (const auto& c : ja.at("zone_order")) a.zone_order.push_back(color_from(c));
      w.areas.push_back(std::move(a));
    }
    for (const auto& jo : j.at("obstacles")) {
      Obstacle o;
      const auto shape = jo.at("shape").get<std::string>();
      if (shape == "rect") {
        o.shape = Obstacle::Shape::Rect;
        o.half_extents = vec_from(jo.at("half_extents"));
      } else if (shape == "circle") {
        o.shape = Obstacle::Shape::Circle;
        o.radius = jo.at("radius").get<double>();
      } else {
        throw std::invalid_argument("unknown obstacle shape " + shape);
      }
      o.center = vec_from(jo.at("center"));
      o.rotation = jo.value("rotation", 0.0);
      o.area = jo.value("area", 0);
      w.obstacles.push_back(o);
    }
    for (const auto& jb : j.at("balls")) {
      Ball b;
      b.id = jb.at("id").get<int>();
      b.color = color_from(jb.at("color"));
      b.position = vec_from(jb.at("position"));
      b.radius = jb.at("radius").get<double>();
      if (!jb.at("carried_by").is_null()) b.carried_by = jb.at("carried_by").get<int>();
      w.balls.push_back(b);
    }
    for (const auto& jz : j.at("zones"))
      w.zones.push_back({jz.at("id").get<int>(), color_from(jz.at("color")), vec_from(jz.at("center")),
                         jz.at("radius").get<double>(), jz.value("area", 0)});
    for (const auto& ja : j.at("agents")) {
      Agent a;
      a.id = ja.at("id").get<int>();
      const auto& p = ja.at("pose");
      a.pose = {p.at("x").get<double>(), p.at("y").get<double>(), p.at("theta").get<double>()};
      a.area = ja.value("area", 0);
      if (ja.contains("velocity"))
        a.velocity = {ja["velocity"].at("linear").get<double>(), ja["velocity"].at("angular").get<double>()};
      if (!ja.at("carried_ball").is_null()) a.carried_ball = ja.at("carried_ball").get<int>();
      w.agents.push_back(a);
    }
    for (const auto& s : j.at("walls"))
      w.walls.push_back({{s.at(0).get<double>(), s.at(1).get<double>()},
                         {s.at(2).get<double>(), s.at(3).get<double>()}});
    for (std::size_t i = 0; i < w.balls.size(); ++i)
      if (w.balls[i].id != static_cast<int>(i)) throw std::invalid_argument("ball ids must be 0..n-1");
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed world: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << contents;
    if (!out.flush()) throw std::runtime_error("cannot write " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot write " + path);
  }
}

}  // namespace procnav
