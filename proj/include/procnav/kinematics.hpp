#pragma once

#include <cstdint>
#include <numbers>

namespace procnav {

/// Planar robot pose. theta is kept in [-pi, pi).
struct Pose {
  double x{0.0};      ///< [m]
  double y{0.0};      ///< [m]
  double theta{0.0};  ///< [rad]

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Unicycle velocity command.
struct Twist {
  double linear{0.0};   ///< v [m/s]
  double angular{0.0};  ///< omega [rad/s]

  friend bool operator==(const Twist&, const Twist&) = default;
};

struct VelocityLimits {
  double max_linear{1.0};
  double max_angular{std::numbers::pi};
};

/// Damped sinusoid angular-velocity profile:
///   omega(t) = amplitude * exp(-damping * t) * sin(2*pi*(t - onset) / period) + bias
struct OscillatorParams {
  double amplitude{0.0};  ///< [rad/s]
  double damping{0.0};    ///< [1/s]
  double onset{0.0};      ///< [s]
  double period{1.0};     ///< [s]
  double bias{0.0};       ///< [rad/s]

  /// Throws std::invalid_argument unless period > 0, damping >= 0, amplitude >= 0.
  void validate() const;
};

/// Fixed-step simulation clock. Time is derived from the integer tick count
/// so it never accumulates floating point drift.
class SimClock {
 public:
  explicit SimClock(double dt = 0.05);

  double dt() const { return dt_; }
  std::uint64_t tick() const { return tick_; }
  double time() const { return static_cast<double>(tick_) * dt_; }

  void advance() { ++tick_; }
  void reset() { tick_ = 0; }

 private:
  double dt_;
  std::uint64_t tick_{0};
};

double oscillatory_omega(const OscillatorParams& params, double t);

/// Wraps an angle into [-pi, pi) using a non-negative remainder, so pi maps to -pi.
/// Throws std::invalid_argument on non-finite input.
double normalize_angle(double theta);

/// One unicycle step. Orientation is updated first and the new heading is
/// used for the position update.
Pose integrate_step(const Pose& pose, const Twist& cmd, double dt);

/// Clamps a command into the limits. Returns true when anything was changed.
bool clamp_twist(Twist& cmd, const VelocityLimits& limits);

}  // namespace procnav
