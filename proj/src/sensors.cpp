#include "procnav/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace procnav {

void LidarConfig::validate() const {
  if (beam_count < 1) throw std::invalid_argument("lidar: beam_count must be >= 1");
  if (!(fov > 0.0) || fov > 2.0 * std::numbers::pi + 1e-12)
    throw std::invalid_argument("lidar: fov must be in (0, 2pi]");
  if (!(max_range > 0.0)) throw std::invalid_argument("lidar: max_range must be > 0");
}

namespace {
bool full_circle(double fov) { return fov >= 2.0 * std::numbers::pi - 1e-12; }
}  // namespace

double LidarConfig::angle_min() const {
  if (beam_count == 1) return mount_offset;
  return mount_offset - fov / 2.0;
}

double LidarConfig::angle_increment() const {
  if (beam_count == 1) return 0.0;
  return full_circle(fov) ? fov / beam_count : fov / (beam_count - 1);
}

double cast_ray(const WorldState& w, Vec2 origin, Vec2 dir, double max_range, std::optional<int> self) {
  double best = max_range;
  auto take = [&](std::optional<double> t) {
    if (t && *t < best) best = *t;
  };
  for (const auto& s : w.walls) take(ray_segment(origin, dir, s));
  for (const auto& o : w.obstacles) take(o.raycast(origin, dir));
  for (const auto& b : w.balls) {
    if (self && b.carried_by == *self) continue;
    take(ray_circle(origin, dir, {b.position, b.radius}));
  }
  for (const auto& a : w.agents) {
    if (self && a.id == *self) continue;
    take(ray_circle(origin, dir, {{a.pose.x, a.pose.y}, w.params.robot_radius}));
  }
  return best;
}

ScanFrame lidar_scan(const WorldState& w, int agent_id, const LidarConfig& config) {
  config.validate();
  const Agent& agent = w.agent(agent_id);
  ScanFrame frame;
  frame.stamp = w.clock.time();
  frame.angle_min = config.angle_min();
  frame.angle_increment = config.angle_increment();
  frame.range_max = config.max_range;
  frame.ranges.reserve(config.beam_count);
  const Vec2 origin{agent.pose.x, agent.pose.y};
  for (int i = 0; i < config.beam_count; ++i) {
    const double angle = agent.pose.theta + frame.angle_min + i * frame.angle_increment;
    frame.ranges.push_back(cast_ray(w, origin, unit_vector(angle), config.max_range, agent_id));
  }
  return frame;
}

OdometrySample sample_odometry(const WorldState& w, int agent_id, const OdometryNoise& noise, Rng& rng) {
  if (noise.sigma_xy < 0.0 || noise.sigma_theta < 0.0)
    throw std::invalid_argument("odometry: negative sigma");
  const Agent& agent = w.agent(agent_id);
  OdometrySample s;
  s.stamp = w.clock.time();
  s.pose = agent.pose;
  s.twist = agent.velocity;
  s.noise_sigma_xy = noise.sigma_xy;
  s.noise_sigma_theta = noise.sigma_theta;
  // Zero sigmas draw nothing, so the sample is the exact pose.
  if (noise.sigma_xy > 0.0) {
    s.pose.x += noise.sigma_xy * rng.gaussian();
    s.pose.y += noise.sigma_xy * rng.gaussian();
  }
  if (noise.sigma_theta > 0.0) s.pose.theta = normalize_angle(s.pose.theta + noise.sigma_theta * rng.gaussian());
  return s;
}

}  // namespace procnav
