#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace cogmask {

/// Seeded random stream with substream derivation.
///
/// Uniform and normal variates are generated from the raw 64-bit engine
/// output directly (no std::*_distribution), so sequences are bit-identical
/// across standard library implementations. Substreams are derived by
/// mixing the parent seed with a stream id, which keeps parallel replicate
/// loops independent of scheduling order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_base_(seed), engine_(mix(seed)) {}

  /// Independent stream for replicate/trial `id` of this seed.
  Rng substream(std::uint64_t id) const {
    return Rng(seed_base_ ^ (0x9e3779b97f4a7c15ULL + id * 0xbf58476d1ce4e5b9ULL));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0,1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; one fresh pair per two calls.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    const double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// +1 or -1 with equal probability.
  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

  std::vector<double> normal_vector(std::size_t n, double stddev) {
    std::vector<double> v(n);
    for (auto& x : v) x = stddev * normal();
    return v;
  }

 private:
  // splitmix64 finalizer; decorrelates consecutive integer seeds.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_base_ = 0;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cogmask
