#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "distribution.hpp"
#include "error.hpp"
#include "ngram_model.hpp"

namespace infograv {

struct MassWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;

  void validate() const {
    for (double w : {alpha, beta, gamma}) {
      if (!std::isfinite(w) || w < 0.0) throw ConfigError("mass weights must be finite and >= 0");
    }
    if (alpha == 0.0 && beta == 0.0 && gamma == 0.0) throw ConfigError("mass weights are all zero");
  }
};

/// M = alpha H + beta D + gamma N, with every input kept alongside.
struct MassReport {
  double entropy_H = 0.0;
  double depth_D = 0.0;
  double novelty_N = 0.0;
  double mass_M = 0.0;
  MassWeights weights;
  std::size_t query_length = 0;
};

/// Mean predictive entropy over the query's positions: position i scores the
/// distribution the model predicts from query[0..i).
template <ConditionalModel M>
double query_entropy(const M& model, std::span<const TokenId> query) {
  if (query.empty()) throw ArgumentError("query_entropy: empty query");
  double sum = 0.0;
  for (std::size_t i = 0; i < query.size(); ++i) {
    sum += shannon_entropy(model.next_dist(query.first(i)).probs());
  }
  return sum / static_cast<double>(query.size());
}

/// Summed pointwise mutual information between the query and each context
/// segment, each term clamped at zero:
///   D = sum_i max(0, log P(Q | C_i) - log P(Q)).
template <ConditionalModel M>
double context_depth(const M& model, std::span<const TokenId> query,
                     std::span<const TokenSeq> segments) {
  if (query.empty()) throw ArgumentError("context_depth: empty query");
  if (segments.empty()) return 0.0;
  const double unconditioned = sequence_logprob(model, query, {});
  double d = 0.0;
  for (const auto& seg : segments) {
    d += std::max(0.0, sequence_logprob(model, query, seg) - unconditioned);
  }
  return d;
}

/// KL divergence from the query's empirical unigram distribution to the
/// baseline unigrams. Ids past the baseline's range count as unknown.
inline double novelty(std::span<const TokenId> query, const BaselineStats& baseline) {
  if (query.empty()) throw ArgumentError("novelty: empty query");
  const auto base = baseline.unigram();
  std::vector<double> empirical(base.size(), 0.0);
  const double w = 1.0 / static_cast<double>(query.size());
  for (TokenId t : query) {
    empirical[t.index() < base.size() ? t.index() : kUnkId.index()] += w;
  }
  return kl_divergence(empirical, base);
}

inline MassReport information_mass(double H, double D, double N, const MassWeights& w = {},
                                   std::size_t query_length = 0) {
  for (double c : {H, D, N}) {
    if (!std::isfinite(c) || c < 0.0) {
      throw ArgumentError("mass components must be finite and >= 0");
    }
  }
  w.validate();
  MassReport r;
  r.entropy_H = H;
  r.depth_D = D;
  r.novelty_N = N;
  r.weights = w;
  r.query_length = query_length;
  r.mass_M = w.alpha * H + w.beta * D + w.gamma * N;
  return r;
}

/// All three components for a query against an n-gram model and its own baseline.
inline MassReport compute_mass(const NgramModel& model, std::span<const TokenId> query,
                               std::span<const TokenSeq> segments = {},
                               const MassWeights& w = {}) {
  return information_mass(query_entropy(model, query), context_depth(model, query, segments),
                          novelty(query, model.baseline()), w, query.size());
}

}  // namespace infograv
