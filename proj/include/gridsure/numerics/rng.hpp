// SPDX-License-Identifier: Apache-2.0
//
// Counter-based splittable RNG. Stream k of a master seed is a pure function
// of (seed, k), so scenario k draws the same numbers no matter which worker
// picks it up or in which order — the determinism contract of the Monte
// Carlo engine rests on this.
#ifndef GRIDSURE_NUMERICS_RNG_HPP
#define GRIDSURE_NUMERICS_RNG_HPP

#include <cmath>
#include <cstdint>

namespace gridsure::numerics {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SplitRng {
 public:
  SplitRng() : state_(0x853c49e6748fea9bULL) {}

  /// Stream `stream` derived from `seed`; distinct streams are independent
  /// for all practical purposes (two tempering rounds of splitmix64).
  SplitRng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    (void)splitmix64(s);
    s ^= 0x9e3779b97f4a7c15ULL * (stream + 1);
    (void)splitmix64(s);
    state_ = s;
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform in [0, 1) with 53 random bits.
  double next_uniform() {
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes exactly two uniforms, so the
  /// draw count per scenario is a fixed function of the model shape.
  double next_normal() {
    double u1 = next_uniform();
    double u2 = next_uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

}  // namespace gridsure::numerics

#endif  // GRIDSURE_NUMERICS_RNG_HPP
