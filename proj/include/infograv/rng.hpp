#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "token.hpp"

namespace infograv {

/// Seeded generator used by every stochastic routine. The engine is the
/// standard 64-bit Mersenne Twister, whose output sequence is fixed by the
/// C++ standard; doubles are built from the top 53 bits so results do not
/// depend on the library's distribution implementations.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  /// Inverse-CDF draw from a normalized probability vector.
  TokenId categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return TokenId{i};
    }
    // u landed in the rounding gap above the final partial sum.
    for (std::size_t i = probs.size(); i-- > 0;) {
      if (probs[i] > 0.0) return TokenId{i};
    }
    return TokenId{std::size_t{0}};
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace infograv
