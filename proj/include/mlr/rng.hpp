#pragma once

#include <array>
#include <cstdint>

namespace mlr {

// SplitMix64 (Steele, Lea, Flood). Used for seeding and stream derivation.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}
  uint64_t next();

 private:
  uint64_t state_;
};

/// xoshiro256++ with splittable substreams.
///
/// Every generator is a pure function of (seed, stream): the four state
/// words come from SplitMix64 applied to a mix of the two, so the same
/// (seed, stream) pair yields the same sequence on every platform.
/// Gaussian variates use Box-Muller on the uniform stream (no rejection
/// loop), two values per transform with the second cached.
class Rng {
 public:
  explicit Rng(uint64_t seed) : Rng(seed, 0) {}
  Rng(uint64_t seed, uint64_t stream);

  uint64_t next_u64();

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform01();
  /// Uniform double in [a, b).
  double uniform(double a, double b);
  /// Standard normal via Box-Muller.
  double gaussian();

 private:
  std::array<uint64_t, 4> s_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace mlr
