#pragma once

#include <cstdint>
#include <limits>

#include "leakscope/rational.hpp"

namespace leakscope {

// xoshiro256++ seeded through SplitMix64. The generator and the bounded-draw
// procedure are fixed here (not delegated to std::) so that a seed produces
// identical counts on every platform and build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : s_) word = splitmix64(x);
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97f4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Independent stream for (master seed, component, batch).
  static Rng derive(std::uint64_t master, std::uint64_t component,
                    std::uint64_t batch) {
    std::uint64_t a = master;
    std::uint64_t h = splitmix64(a);
    a = h ^ (component * 0xA24BAED4963EE407ULL);
    h = splitmix64(a);
    a = h ^ (batch * 0x9FB21C651E98DF25ULL);
    return Rng(splitmix64(a));
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [lo, hi], rejection-sampled to stay unbiased.
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span =
        static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());  // full range
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t cut = max - (max % span + 1) % span;
    std::uint64_t x = next();
    while (cut != max && x > cut) x = next();
    return lo + static_cast<std::int64_t>(x % span);
  }

  /// Exact Bernoulli for a rational probability.
  bool bernoulli(const Rational& p) {
    if (p <= 0) return false;
    if (p >= 1) return true;
    const auto num = boost::multiprecision::numerator(p);
    const auto den = boost::multiprecision::denominator(p);
    if (den <= std::numeric_limits<std::int64_t>::max()) {
      const auto d = den.convert_to<std::int64_t>();
      const auto n = num.convert_to<std::int64_t>();
      return uniform(0, d - 1) < n;
    }
    return u01() < to_double(p);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double u01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

}  // namespace leakscope
