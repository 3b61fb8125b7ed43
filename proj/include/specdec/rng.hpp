#pragma once

#include <cstdint>
#include <random>

namespace specdec {

// Deterministic random source. mt19937_64 has a fully specified state
// transition, and every derived draw below is computed with fixed arithmetic
// instead of std::*_distribution (whose output is implementation-defined),
// so identical seeds give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return (engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), unbiased via rejection.
  std::uint64_t next_below(std::uint64_t bound);

  // Standard normal (Box-Muller, consumes exactly two uniforms).
  double next_gaussian();

  // Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled by boosting.
  double next_gamma(double shape);

 private:
  std::mt19937_64 engine_;
};

// Stateless 64-bit mix (splitmix64 finalizer). Used to key reproducible
// pseudorandom values off small tuples.
std::uint64_t mix64(std::uint64_t x);

// Pseudorandom value in [0, 1) keyed by (seed, a, b), symmetric in (a, b).
double keyed_unit(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

}  // namespace specdec
