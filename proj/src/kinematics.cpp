#include "procnav/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace procnav {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

void OscillatorParams::validate() const {
  if (!(period > 0.0)) throw std::invalid_argument("oscillator period must be > 0");
  if (!(damping >= 0.0)) throw std::invalid_argument("oscillator damping must be >= 0");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("oscillator amplitude must be >= 0");
}

SimClock::SimClock(double dt) : dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("clock dt must be > 0");
}

double oscillatory_omega(const OscillatorParams& p, double t) {
  return p.amplitude * std::exp(-p.damping * t) * std::sin(kTwoPi * (t - p.onset) / p.period) +
         p.bias;
}

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("normalize_angle: non-finite input");
  // In-range values are returned untouched; the round trip through +pi/-pi
  // is not exact in floating point and would break idempotence.
  if (theta >= -kPi && theta < kPi) return theta;
  double r = std::fmod(theta + kPi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value plus 2pi can round up to exactly 2pi.
  if (r >= kTwoPi) r = 0.0;
  return r - kPi;
}

Pose integrate_step(const Pose& pose, const Twist& cmd, double dt) {
  Pose next;
  next.theta = normalize_angle(pose.theta + cmd.angular * dt);
  next.x = pose.x + cmd.linear * std::cos(next.theta) * dt;
  next.y = pose.y + cmd.linear * std::sin(next.theta) * dt;
  return next;
}

bool clamp_twist(Twist& cmd, const VelocityLimits& limits) {
  const Twist before = cmd;
  if (!std::isfinite(cmd.linear)) cmd.linear = 0.0;
  if (!std::isfinite(cmd.angular)) cmd.angular = 0.0;
  cmd.linear = std::clamp(cmd.linear, -limits.max_linear, limits.max_linear);
  cmd.angular = std::clamp(cmd.angular, -limits.max_angular, limits.max_angular);
  return !(cmd == before);
}

}  // namespace procnav
