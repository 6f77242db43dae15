#pragma once

#include <cstdint>
#include <vector>

#include "branchsim/errors.hpp"

namespace branchsim {

// splitmix64. Small state, full 64-bit output, bit-identical on every
// platform. std::mt19937 plus the standard distributions would not give
// reproducible streams across standard libraries, so all Monte Carlo in
// this project draws from this generator.
inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {
    // Warm up so that small seeds do not produce correlated openings.
    splitmix64(state_);
    splitmix64(state_);
  }

  // Independent stream for trial `index` under the same master seed.
  // Streams depend only on (seed, index), never on draw order, so
  // parallel trial execution reproduces the sequential results.
  static Rng stream(uint64_t seed, uint64_t index) {
    uint64_t s = seed;
    uint64_t a = splitmix64(s);
    uint64_t t = a ^ (0xD1B54A32D192ED03ull * (index + 1));
    return Rng(t);
  }

  uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) {
    // Multiply-shift rejection-free mapping; bias is negligible for the
    // desk-scale n used here (n << 2^32).
    return static_cast<uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool next_bool() { return (next_u64() >> 63) != 0; }

  // Standard normal via Box-Muller. Two uniforms per call keeps the
  // draw count deterministic.
  double next_normal();

 private:
  uint64_t state_;
};

// Sampler over a fixed categorical distribution, by inverse CDF lookup.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(const std::vector<double>& probabilities);

  std::size_t sample(Rng& rng) const;
  std::size_t size() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

}  // namespace branchsim
