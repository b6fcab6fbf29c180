// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace cvhd {

/// Counter-based random stream (SplitMix64 finalizer over a Weyl sequence).
/// A stream is a pure function of its key, so any consumer can regenerate the
/// exact same sequence regardless of thread or call order. Keys are derived
/// from (seed, domain, ids) so every trace / grid point / purpose gets an
/// independent stream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : state_(key) {}

  /// Domains keep streams for different purposes disjoint.
  enum Domain : std::uint64_t {
    kTraceSynth = 1,
    kDecimate = 2,
    kCalibration = 3,
    kTest = 0xFE,
  };

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t domain,
                                  std::uint64_t id_a = 0, std::uint64_t id_b = 0) {
    std::uint64_t h = mix(seed);
    h = mix(h ^ (0xD1B54A32D192ED03ull + domain));
    h = mix(h ^ (0x8CB92BA72F3D8DD7ull + id_a));
    h = mix(h ^ (0xABCD5A32D192ED03ull + id_b));
    return h;
  }

  std::uint64_t next_u64() { return mix(state_ + (counter_++) * 0x9E3779B97F4A7C15ull); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (two uniforms per draw, no caching, so
  /// consumption per call is fixed).
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 0x1.0p-64) u1 = 0x1.0p-64;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  std::uint64_t state_;
  std::uint64_t counter_ = 0;
};

}  // namespace cvhd
