// Copyright (c) 2026 UPN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UPN_RNG_HPP
#define UPN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace upn {

/// Seeded random source with portable value derivation.
///
/// The raw stream comes from std::mt19937_64, whose output sequence for a
/// given seed is pinned by the standard. All mappings to doubles/ints are
/// done explicitly here instead of through std::*_distribution, so a seed
/// reproduces the exact same draws on any platform. Every dataset, schedule
/// and checkpoint in this project depends on that.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), gen_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return std::ldexp(static_cast<double>(gen_() >> 11), -53);
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], inclusive, unbiased.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    const uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<int64_t>(gen_());  // full 64-bit range
    const uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    uint64_t draw;
    do {
      draw = gen_();
    } while (draw >= limit);
    return lo + static_cast<int64_t>(draw % range);
  }

  bool coin() { return (gen_() & 1u) != 0; }

  /// Standard normal via Box-Muller (cosine branch only).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Derives an independent labeled stream. fork(k) depends only on the
  /// original seed and k, not on how much of this stream was consumed.
  Rng fork(uint64_t key) const { return Rng(mix(seed_, key)); }

  /// SplitMix64-style avalanche of (seed, key) into a new seed.
  static uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace upn

#endif  // UPN_RNG_HPP
