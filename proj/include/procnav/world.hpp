#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "procnav/geometry.hpp"
#include "procnav/kinematics.hpp"

namespace procnav {

enum class Color { Red, Green, Blue, Orange, Yellow, Purple };

inline constexpr std::array<Color, 6> kPalette = {Color::Red,    Color::Green,  Color::Blue,
                                                  Color::Orange, Color::Yellow, Color::Purple};

std::string_view to_string(Color c);
/// Case-insensitive palette lookup.
std::optional<Color> parse_color(std::string_view name);

enum class CellKind : std::uint8_t { Free, Obstacle, Wall, Ball, Zone, Agent, Entry, Exit, Passage };

std::string_view to_string(CellKind k);

struct CellIndex {
  int x{0};
  int y{0};
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Cell rectangle of one area inside the global grid.
struct AreaCells {
  int x0{0};
  int y0{0};
  int width{0};
  int height{0};

  bool contains(CellIndex c) const {
    return c.x >= x0 && c.x < x0 + width && c.y >= y0 && c.y < y0 + height;
  }
  friend bool operator==(const AreaCells&, const AreaCells&) = default;
};

/// Cell-level occupancy plan of the whole world. Areas sit left to right,
/// separated by one-cell wall columns; passages are holes in those columns.
struct GridLayout {
  int width{0};
  int height{0};
  double cell_size{1.0};
  std::vector<CellKind> cells;  // row-major, y * width + x
  std::vector<int> area_of;     // -1 outside every area
  std::vector<AreaCells> areas;

  bool in_bounds(CellIndex c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  CellKind at(CellIndex c) const { return cells[index(c)]; }
  CellKind& at(CellIndex c) { return cells[index(c)]; }
  int area(CellIndex c) const { return area_of[index(c)]; }
  std::size_t index(CellIndex c) const { return static_cast<std::size_t>(c.y) * width + c.x; }

  bool blocked(CellIndex c) const {
    if (!in_bounds(c)) return true;
    const auto k = at(c);
    return k == CellKind::Obstacle || k == CellKind::Wall;
  }
  Vec2 center(CellIndex c) const { return {(c.x + 0.5) * cell_size, (c.y + 0.5) * cell_size}; }
  Box box(CellIndex c) const {
    return {{c.x * cell_size, c.y * cell_size}, {(c.x + 1) * cell_size, (c.y + 1) * cell_size}};
  }
  /// Cell containing a world point, nullopt outside the grid.
  std::optional<CellIndex> cell_of(Vec2 p) const;

  friend bool operator==(const GridLayout&, const GridLayout&) = default;
};

struct Area {
  int index{0};
  AreaCells cells;
  Box bounds;
  /// Declared color order, used when describing the area.
  std::vector<Color> ball_order;
  std::vector<Color> zone_order;
};

struct Obstacle {
  enum class Shape { Rect, Circle };
  Shape shape{Shape::Rect};
  Vec2 center;
  Vec2 half_extents;   // Rect only
  double radius{0.0};  // Circle only
  double rotation{0.0};
  int area{0};

  OrientedRect rect() const { return {center, half_extents, rotation}; }
  Circle circle() const { return {center, radius}; }
  bool contains(Vec2 p) const;
  double distance_to(Vec2 p) const;
  double distance_to(const Segment& s) const;
  std::optional<double> raycast(Vec2 origin, Vec2 dir) const;
};

struct Ball {
  int id{0};
  Color color{Color::Red};
  Vec2 position;
  double radius{0.1};
  std::optional<int> carried_by;
};

struct Zone {
  int id{0};
  Color color{Color::Red};
  Vec2 center;
  double radius{0.5};
  int area{0};

  bool contains(Vec2 p) const { return distance(p, center) <= radius; }
};

struct Agent {
  int id{0};
  Pose pose;
  std::optional<int> carried_ball;
  int area{0};
  Twist velocity;  ///< applied during the last step (zero after a collision)
};

struct WorldParams {
  double robot_radius{0.3};
  VelocityLimits limits;
};

struct WorldState {
  std::uint64_t seed{0};
  WorldParams params;
  GridLayout layout;
  std::vector<Area> areas;
  std::vector<Obstacle> obstacles;
  std::vector<Ball> balls;
  std::vector<Zone> zones;
  std::vector<Agent> agents;
  std::vector<Segment> walls;
  SimClock clock;

  const Agent& agent(int id) const;
  Agent& agent(int id);
  /// Index of the area whose bounds contain p, or -1.
  int area_at(Vec2 p) const;
};

class UnknownAgentError : public std::out_of_range {
 public:
  explicit UnknownAgentError(int id);
  int id() const { return id_; }

 private:
  int id_;
};

enum class EventKind { Collision, Clamp, ZoneEnter, Pickup, Drop };

std::string_view to_string(EventKind k);

struct Event {
  EventKind kind{EventKind::Collision};
  std::uint64_t tick{0};
  int agent{0};
  std::optional<int> ball;
  std::optional<int> zone;
  std::string detail;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Discrete world changes requested by behaviors; applied at the start of a step.
struct Mutation {
  enum class Kind { Pickup, Drop };
  Kind kind{Kind::Pickup};
  int agent{0};
  int ball{-1};  // Pickup only
};

struct StepResult {
  WorldState world;
  std::vector<Event> events;
};

/// Advances every agent by one tick. Agents missing from `commands` hold still.
/// Throws UnknownAgentError for a command or mutation naming a missing agent and
/// std::invalid_argument when dt differs from the world clock or a mutation is
/// inapplicable.
StepResult step_world(const WorldState& world, const std::map<int, Twist>& commands, double dt,
                      std::span<const Mutation> mutations = {});

/// In-place variant of step_world; returns the events.
std::vector<Event> advance_world(WorldState& world, const std::map<int, Twist>& commands,
                                 std::span<const Mutation> mutations = {});

/// True when a disc of the robot radius at `p` touches a wall, obstacle, or
/// (other) agent. Used by tests and placement.
bool disc_in_collision(const WorldState& world, Vec2 p, std::optional<int> ignore_agent = {});

}  // namespace procnav
