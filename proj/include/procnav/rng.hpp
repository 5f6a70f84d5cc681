#pragma once

#include <cstdint>
#include <random>

namespace procnav {

/// Portable deterministic random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are not, so every mapping from raw
/// 64-bit words to values is done here:
///   - uniform01: top 53 bits scaled by 2^-53, in [0, 1)
///   - uniform_int(n): rejection sampling on the raw word, unbiased
///   - gaussian: Box-Muller, both outputs used
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Standard normal deviate.
  double gaussian();

  /// Derives an independent stream seed, e.g. one per agent.
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
  bool has_spare_{false};
  double spare_{0.0};
};

}  // namespace procnav
