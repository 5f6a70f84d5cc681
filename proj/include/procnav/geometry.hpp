#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace procnav {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

struct Segment {
  Vec2 a;
  Vec2 b;
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Circle {
  Vec2 center;
  double radius{0.0};
};

/// Rectangle with half extents along its local axes, rotated by `rotation`.
struct OrientedRect {
  Vec2 center;
  Vec2 half_extents;
  double rotation{0.0};

  std::array<Vec2, 4> corners() const;
  Vec2 to_local(Vec2 p) const;
};

/// Axis-aligned box, used for grid cells and area bounds.
struct Box {
  Vec2 min;
  Vec2 max;

  bool contains(Vec2 p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
  OrientedRect as_rect() const {
    return {{(min.x + max.x) / 2, (min.y + max.y) / 2}, {(max.x - min.x) / 2, (max.y - min.y) / 2}, 0.0};
  }
};

// Ray casts return the smallest parameter t > 0 along origin + t * dir
// (dir is a unit vector), or nullopt if there is no hit.
std::optional<double> ray_segment(Vec2 origin, Vec2 dir, const Segment& s);
std::optional<double> ray_circle(Vec2 origin, Vec2 dir, const Circle& c);
std::optional<double> ray_rect(Vec2 origin, Vec2 dir, const OrientedRect& r);

double point_segment_distance(Vec2 p, const Segment& s);
double segment_segment_distance(const Segment& s, const Segment& t);

bool point_in_circle(Vec2 p, const Circle& c);
bool point_in_rect(Vec2 p, const OrientedRect& r);

/// Distance from a point to the filled shape (0 when inside).
double point_rect_distance(Vec2 p, const OrientedRect& r);
double point_circle_distance(Vec2 p, const Circle& c);

/// Distance from a segment to the filled shape (0 when they touch or overlap).
double segment_rect_distance(const Segment& s, const OrientedRect& r);
double segment_circle_distance(const Segment& s, const Circle& c);

/// Distance between filled shapes, 0 when they intersect.
double rect_rect_distance(const OrientedRect& a, const OrientedRect& b);
double circle_rect_distance(const Circle& c, const OrientedRect& r);
double circle_circle_distance(const Circle& a, const Circle& b);

}  // namespace procnav
