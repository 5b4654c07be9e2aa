#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "token.hpp"

namespace infograv {

enum class DistSource { BuiltinModel, DumpReplay, Derived };

inline const char* to_string(DistSource s) {
  switch (s) {
    case DistSource::BuiltinModel: return "builtin-model";
    case DistSource::DumpReplay: return "dump-replay";
    case DistSource::Derived: return "derived";
  }
  return "unknown";
}

/// Mixes `probs` (already summing to one) with the floor so that every entry
/// is at least kProbFloor and the total is unchanged:
///   p' = (1 - |V| eps) p + eps.
/// The map is strictly increasing, so token ordering is preserved.
inline void apply_floor(std::vector<double>& probs) {
  const double scale = 1.0 - static_cast<double>(probs.size()) * kProbFloor;
  if (scale <= 0.0) {
    throw ArgumentError("vocabulary too large for the probability floor");
  }
  for (double& p : probs) p = scale * p + kProbFloor;
}

/// One next-token distribution over a vocabulary.
class DistributionView {
 public:
  static constexpr double kSumTolerance = 1e-9;

  DistributionView(std::vector<double> probs, TokenSeq context, DistSource source,
                   std::vector<std::string> labels = {})
      : probs_(std::move(probs)),
        context_(std::move(context)),
        source_(source),
        labels_(std::move(labels)) {
    if (probs_.empty()) throw ArgumentError("empty distribution");
    if (!labels_.empty() && labels_.size() != probs_.size()) {
      throw ArgumentError("label count does not match distribution size");
    }
    double sum = 0.0;
    for (double p : probs_) {
      // Allow one ulp-scale slack below the floor for values produced by apply_floor.
      if (!std::isfinite(p) || p < kProbFloor * (1.0 - 1e-9) || p > 1.0 + kSumTolerance) {
        throw ArgumentError("probability outside [floor, 1]");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw ArgumentError("distribution does not sum to 1 (sum=" + std::to_string(sum) + ")");
    }
  }

  /// Normalizes non-negative weights, then applies the probability floor.
  static DistributionView from_weights(std::vector<double> weights, TokenSeq context = {},
                                       DistSource source = DistSource::Derived,
                                       std::vector<std::string> labels = {}) {
    double sum = 0.0;
    for (double w : weights) {
      if (!std::isfinite(w) || w < 0.0) throw ArgumentError("weights must be finite and >= 0");
      sum += w;
    }
    if (!(sum > 0.0)) throw ArgumentError("weights sum to zero");
    for (double& w : weights) w /= sum;
    apply_floor(weights);
    return DistributionView(std::move(weights), std::move(context), source, std::move(labels));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](TokenId t) const { return probs_.at(t.index()); }
  std::span<const double> probs() const noexcept { return probs_; }
  const TokenSeq& context() const noexcept { return context_; }
  DistSource source() const noexcept { return source_; }
  /// Surface labels; only populated for dump replays.
  const std::vector<std::string>& labels() const noexcept { return labels_; }

 private:
  std::vector<double> probs_;
  TokenSeq context_;
  DistSource source_;
  std::vector<std::string> labels_;
};

/// Shannon entropy in nats.
inline double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return std::max(0.0, h);
}

/// D_KL(p || q) in nats. Terms with p = 0 contribute nothing; q must be
/// positive wherever p is.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ArgumentError("kl_divergence: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) throw ArgumentError("kl_divergence: q has zero where p does not");
    d += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(0.0, d);
}

/// Half the L1 distance.
inline double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ArgumentError("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

/// Index of the largest entry; ties go to the lowest index.
inline TokenId argmax(std::span<const double> p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = i;
  }
  return TokenId{best};
}

/// Index of the smallest entry; ties go to the lowest index.
inline TokenId argmin(std::span<const double> p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] < p[best]) best = i;
  }
  return TokenId{best};
}

}  // namespace infograv
