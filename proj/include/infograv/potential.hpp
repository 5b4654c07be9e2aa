#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "distribution.hpp"
#include "error.hpp"
#include "token.hpp"

namespace infograv {

/// Semantic potential over a vocabulary: phi[t] = -ln P(t | context).
/// Low potential means high probability.
class PotentialField {
 public:
  /// Highest potential a floored distribution can produce, -ln(kProbFloor).
  static double floor_potential() { return -std::log(kProbFloor); }

  static PotentialField from_distribution(const DistributionView& d) {
    std::vector<double> phi(d.size());
    const auto p = d.probs();
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = -std::log(p[i]);
    return PotentialField(std::move(phi), d.context());
  }

  /// Arbitrary finite values; used for planted fields and derived maps.
  static PotentialField from_values(std::vector<double> phi, TokenSeq context = {}) {
    for (double v : phi) {
      if (!std::isfinite(v)) throw ArgumentError("potential values must be finite");
    }
    if (phi.empty()) throw ArgumentError("empty potential field");
    return PotentialField(std::move(phi), std::move(context));
  }

  std::size_t size() const noexcept { return phi_.size(); }
  double operator[](TokenId t) const { return phi_.at(t.index()); }
  std::span<const double> phi() const noexcept { return phi_; }
  const TokenSeq& context() const noexcept { return context_; }

 private:
  PotentialField(std::vector<double> phi, TokenSeq context)
      : phi_(std::move(phi)), context_(std::move(context)) {}

  std::vector<double> phi_;
  TokenSeq context_;
};

inline PotentialField potential(const DistributionView& d) {
  return PotentialField::from_distribution(d);
}

}  // namespace infograv
