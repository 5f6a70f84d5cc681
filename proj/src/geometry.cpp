#include "procnav/geometry.hpp"

#include <algorithm>
#include <limits>

namespace procnav {

namespace {
constexpr double kEps = 1e-12;
}

std::array<Vec2, 4> OrientedRect::corners() const {
  const Vec2 u = unit_vector(rotation);
  const Vec2 v{-u.y, u.x};
  const Vec2 du = u * half_extents.x;
  const Vec2 dv = v * half_extents.y;
  return {center + du + dv, center - du + dv, center - du - dv, center + du - dv};
}

Vec2 OrientedRect::to_local(Vec2 p) const {
  const Vec2 d = p - center;
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

std::optional<double> ray_segment(Vec2 origin, Vec2 dir, const Segment& s) {
  const Vec2 e = s.b - s.a;
  const double denom = cross(dir, e);
  if (std::abs(denom) < kEps) return std::nullopt;  // parallel, grazing hits ignored
  const Vec2 w = s.a - origin;
  const double t = cross(w, e) / denom;
  const double u = cross(w, dir) / denom;
  if (t <= kEps || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

std::optional<double> ray_circle(Vec2 origin, Vec2 dir, const Circle& c) {
  const Vec2 m = origin - c.center;
  const double b = dot(m, dir);
  const double cc = dot(m, m) - c.radius * c.radius;
  const double disc = b * b - cc;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = -b - sq;
  if (t0 > kEps) return t0;
  const double t1 = -b + sq;
  if (t1 > kEps) return t1;
  return std::nullopt;
}

std::optional<double> ray_rect(Vec2 origin, Vec2 dir, const OrientedRect& r) {
  // Slab test in the rectangle frame.
  const Vec2 o = r.to_local(origin);
  const double c = std::cos(r.rotation);
  const double s = std::sin(r.rotation);
  const Vec2 d{c * dir.x + s * dir.y, -s * dir.x + c * dir.y};
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  const double oc[2] = {o.x, o.y};
  const double dc[2] = {d.x, d.y};
  const double he[2] = {r.half_extents.x, r.half_extents.y};
  for (int i = 0; i < 2; ++i) {
    if (std::abs(dc[i]) < kEps) {
      if (oc[i] < -he[i] || oc[i] > he[i]) return std::nullopt;
      continue;
    }
    double t1 = (-he[i] - oc[i]) / dc[i];
    double t2 = (he[i] - oc[i]) / dc[i];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
    if (tmin > tmax) return std::nullopt;
  }
  if (tmin > kEps) return tmin;
  if (tmax > kEps) return tmax;
  return std::nullopt;
}

double point_segment_distance(Vec2 p, const Segment& s) {
  const Vec2 e = s.b - s.a;
  const double len2 = dot(e, e);
  if (len2 <= 0.0) return distance(p, s.a);
  const double t = std::clamp(dot(p - s.a, e) / len2, 0.0, 1.0);
  return distance(p, s.a + e * t);
}

namespace {

bool segments_intersect(const Segment& s, const Segment& t) {
  const Vec2 r = s.b - s.a;
  const Vec2 q = t.b - t.a;
  const double d1 = cross(r, t.a - s.a);
  const double d2 = cross(r, t.b - s.a);
  const double d3 = cross(q, s.a - t.a);
  const double d4 = cross(q, s.b - t.a);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

std::array<Segment, 4> edges(const OrientedRect& r) {
  const auto c = r.corners();
  return {Segment{c[0], c[1]}, Segment{c[1], c[2]}, Segment{c[2], c[3]}, Segment{c[3], c[0]}};
}

}  // namespace

double segment_segment_distance(const Segment& s, const Segment& t) {
  if (segments_intersect(s, t)) return 0.0;
  return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                   point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

bool point_in_circle(Vec2 p, const Circle& c) { return distance(p, c.center) <= c.radius; }

bool point_in_rect(Vec2 p, const OrientedRect& r) {
  const Vec2 l = r.to_local(p);
  return std::abs(l.x) <= r.half_extents.x && std::abs(l.y) <= r.half_extents.y;
}

double point_rect_distance(Vec2 p, const OrientedRect& r) {
  const Vec2 l = r.to_local(p);
  const double dx = std::max(std::abs(l.x) - r.half_extents.x, 0.0);
  const double dy = std::max(std::abs(l.y) - r.half_extents.y, 0.0);
  return std::hypot(dx, dy);
}

double point_circle_distance(Vec2 p, const Circle& c) {
  return std::max(distance(p, c.center) - c.radius, 0.0);
}

double segment_rect_distance(const Segment& s, const OrientedRect& r) {
  if (point_in_rect(s.a, r) || point_in_rect(s.b, r)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : edges(r)) best = std::min(best, segment_segment_distance(s, e));
  return best;
}

double segment_circle_distance(const Segment& s, const Circle& c) {
  return std::max(point_segment_distance(c.center, s) - c.radius, 0.0);
}

double rect_rect_distance(const OrientedRect& a, const OrientedRect& b) {
  if (point_in_rect(a.center, b) || point_in_rect(b.center, a)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ea : edges(a))
    for (const auto& eb : edges(b)) best = std::min(best, segment_segment_distance(ea, eb));
  return best;
}

double circle_rect_distance(const Circle& c, const OrientedRect& r) {
  return std::max(point_rect_distance(c.center, r) - c.radius, 0.0);
}

double circle_circle_distance(const Circle& a, const Circle& b) {
  return std::max(distance(a.center, b.center) - a.radius - b.radius, 0.0);
}

}  // namespace procnav
