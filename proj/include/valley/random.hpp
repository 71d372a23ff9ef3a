#pragma once

#include <cstdint>
#include <random>

namespace valley {

/// SplitMix64 finaliser; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Random source with a fixed, platform-independent output for a given
/// seed: std::mt19937_64 (whose sequence is fixed by the standard) plus
/// hand-written variate transforms. The std:: distributions are avoided on
/// purpose; their outputs are implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Stream `block` of `seed`; streams for distinct blocks are independent.
  static Rng for_block(std::uint64_t seed, std::uint64_t block);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  double exponential() { return -std::log(uniform_open()); }
  /// Standard normal (Marsaglia polar method, one variate cached).
  double normal();
  /// Unit-scale gamma variate (Marsaglia-Tsang; boosted for shape < 1).
  double gamma(double shape);
  /// +1 or -1 with equal probability.
  double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace valley
