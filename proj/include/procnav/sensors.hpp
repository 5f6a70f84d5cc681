#pragma once

#include <numbers>
#include <optional>
#include <vector>

#include "procnav/rng.hpp"
#include "procnav/world.hpp"

namespace procnav {

struct LidarConfig {
  int beam_count{360};
  double fov{1.5 * std::numbers::pi};
  double max_range{10.0};
  double mount_offset{0.0};  ///< beam fan center relative to the heading

  void validate() const;
  /// First beam angle relative to the heading. Beams are spread over the fov
  /// with both ends included; a full circle is split into equal sectors
  /// without repeating the seam.
  double angle_min() const;
  double angle_increment() const;
};

struct ScanFrame {
  double stamp{0.0};
  double angle_min{0.0};
  double angle_increment{0.0};
  double range_max{0.0};
  std::vector<double> ranges;  // counterclockwise from angle_min
};

struct OdometryNoise {
  double sigma_xy{0.0};
  double sigma_theta{0.0};
};

struct OdometrySample {
  double stamp{0.0};
  Pose pose;
  Twist twist;
  double noise_sigma_xy{0.0};
  double noise_sigma_theta{0.0};
};

/// Distance to the first wall, obstacle, free ball or other agent along a ray,
/// capped at max_range. `self` is excluded together with the ball it carries.
double cast_ray(const WorldState& world, Vec2 origin, Vec2 dir, double max_range,
                std::optional<int> self = {});

/// Throws UnknownAgentError or std::invalid_argument for a bad config.
ScanFrame lidar_scan(const WorldState& world, int agent, const LidarConfig& config);

/// Ground truth pose plus independent Gaussian noise in the world frame.
/// Throws std::invalid_argument for negative sigmas.
OdometrySample sample_odometry(const WorldState& world, int agent, const OdometryNoise& noise,
                               Rng& rng);

}  // namespace procnav
