#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "distribution.hpp"
#include "error.hpp"
#include "ngram_model.hpp"
#include "potential.hpp"
#include "sampler.hpp"

namespace infograv {

/// Potential shift caused by replacing query Q with Q', measured on the
/// next-token distribution at the end of each query.
struct SensitivityReport {
  std::vector<double> delta_phi;
  double mean_abs_delta = 0.0;
  double max_abs_delta = 0.0;
  double total_variation = 0.0;
  bool argmax_changed = false;
};

inline SensitivityReport sensitivity_between(const DistributionView& base, const DistributionView& perturbed) {
  if (base.size() != perturbed.size()) throw ArgumentError("sensitivity: vocabulary size mismatch");
  const auto p = base.probs();
  const auto q = perturbed.probs();
  SensitivityReport r;
  r.delta_phi.resize(p.size());
  double sum_abs = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    // -ln q + ln p, written to give exactly zero when q == p.
    r.delta_phi[i] = std::log(p[i]) - std::log(q[i]);
    const double a = std::abs(r.delta_phi[i]);
    sum_abs += a;
    r.max_abs_delta = std::max(r.max_abs_delta, a);
  }
  r.mean_abs_delta = sum_abs / static_cast<double>(p.size());
  r.total_variation = total_variation(p, q);
  r.argmax_changed = argmax(p) != argmax(q);
  return r;
}

template <ConditionalModel M>
SensitivityReport sensitivity(const M& model, std::span<const TokenId> q, std::span<const TokenId> q_prime) {
  if (q.empty() || q_prime.empty()) throw ArgumentError("sensitivity: queries must be non-empty");
  return sensitivity_between(model.next_dist(q), model.next_dist(q_prime));
}

/// Per-token pointwise mutual information between query and response:
///   [log P(R | Q) - log P(R)] / |R|.
/// Negative when the query makes the response less likely.
template <ConditionalModel M>
double conductivity(const M& model, std::span<const TokenId> query, std::span<const TokenId> response) {
  if (query.empty() || response.empty()) throw ArgumentError("conductivity: sequences must be non-empty");
  const double conditioned = sequence_logprob(model, response, query);
  const double bare = sequence_logprob(model, response, {});
  return (conditioned - bare) / static_cast<double>(response.size());
}

/// 1 - mean total-variation distance between next_dist(Q) and each perturbation's.
template <ConditionalModel M>
double stability(const M& model, std::span<const TokenId> q, std::span<const TokenSeq> perturbations) {
  if (perturbations.empty()) throw ArgumentError("stability: no perturbations");
  const auto base = model.next_dist(q);
  double tv = 0.0;
  for (const auto& pq : perturbations) tv += total_variation(base.probs(), model.next_dist(pq).probs());
  return 1.0 - tv / static_cast<double>(perturbations.size());
}

/// Leave-one-token-out variants of a query, in position order.
inline std::vector<TokenSeq> deletion_perturbations(std::span<const TokenId> q) {
  std::vector<TokenSeq> out;
  for (std::size_t i = 0; i < q.size(); ++i) {
    TokenSeq v;
    v.reserve(q.size() - 1);
    for (std::size_t j = 0; j < q.size(); ++j)
      if (j != i) v.push_back(q[j]);
    out.push_back(std::move(v));
  }
  return out;
}

struct SweepReport {
  std::vector<double> temperatures;
  std::vector<double> entropies;
  std::size_t vocab_size = 0;
  std::vector<std::size_t> distinct_outputs;
  /// Mean fraction of positions on which two generations agree, over all
  /// seed pairs; 1 when there is a single seed.
  std::vector<double> mean_pairwise_overlap;
  std::vector<Trajectory> samples;  // temperature-major, seed-minor
};

inline double positional_overlap(const TokenSeq& a, const TokenSeq& b) {
  const std::size_t n = std::max(a.size(), b.size());
  if (n == 0) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(n);
}

template <ConditionalModel M>
SweepReport temperature_sweep(const M& model, std::span<const TokenId> query, std::span<const double> temperatures,
                              std::span<const std::uint64_t> seeds, std::size_t gen_len) {
  if (temperatures.size() < 2) throw ArgumentError("temperature_sweep: need at least two temperatures");
  if (seeds.empty()) throw ArgumentError("temperature_sweep: need at least one seed");
  for (std::size_t i = 1; i < temperatures.size(); ++i) {
    if (!(temperatures[i] > temperatures[i - 1])) {
      throw ArgumentError("temperature_sweep: temperatures must be strictly ascending");
    }
  }
  const auto field = potential(model.next_dist(query));
  SweepReport r;
  r.vocab_size = model.vocab_size();
  for (double tv : temperatures) {
    const Temperature t(tv);
    r.temperatures.push_back(tv);
    r.entropies.push_back(shannon_entropy(boltzmann(field, t).probs()));
    std::set<TokenSeq> distinct;
    std::vector<TokenSeq> outs;
    for (auto seed : seeds) {
      auto traj = generate(model, query, t, GenerateOptions{.max_len = gen_len, .seed = seed});
      distinct.insert(traj.tokens);
      outs.push_back(traj.tokens);
      r.samples.push_back(std::move(traj));
    }
    double overlap = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < outs.size(); ++i)
      for (std::size_t j = i + 1; j < outs.size(); ++j, ++pairs) overlap += positional_overlap(outs[i], outs[j]);
    r.distinct_outputs.push_back(distinct.size());
    r.mean_pairwise_overlap.push_back(pairs ? overlap / static_cast<double>(pairs) : 1.0);
  }
  return r;
}

struct HallucinationProxy {
  /// Fraction of generated tokens whose order-n gram (the token with its
  /// n-1 predecessors, query included) never occurs in the training corpus.
  double oos_rate = 0.0;
  /// Mean -ln baseline unigram probability of the generated tokens.
  double mean_surprisal = 0.0;
};

/// Near the start of a short context the gram is truncated to what exists.
inline HallucinationProxy hallucination_proxy(const Trajectory& traj, const BaselineStats& baseline, int order) {
  if (traj.tokens.empty()) throw ArgumentError("hallucination_proxy: empty trajectory");
  if (order < 1 || order > baseline.max_order()) {
    throw ArgumentError("hallucination_proxy: order must be in [1, " + std::to_string(baseline.max_order()) + "]");
  }
  TokenSeq all = traj.query;
  all.insert(all.end(), traj.tokens.begin(), traj.tokens.end());
  const std::size_t offset = traj.query.size();
  std::size_t unseen = 0;
  double surprisal = 0.0;
  for (std::size_t i = 0; i < traj.tokens.size(); ++i) {
    const std::size_t end = offset + i + 1;
    const std::size_t len = std::min<std::size_t>(static_cast<std::size_t>(order), end);
    const std::span<const TokenId> gram(all.data() + end - len, len);
    if (!baseline.observed(gram)) ++unseen;
    const TokenId t = traj.tokens[i];
    const double p = t.index() < baseline.unigram().size() ? baseline.unigram(t) : baseline.unigram(kUnkId);
    surprisal -= std::log(p);
  }
  const double n = static_cast<double>(traj.tokens.size());
  return {static_cast<double>(unseen) / n, surprisal / n};
}

/// Ranks with ties sharing their average rank (1-based).
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

/// Spearman rank correlation. Undefined (nullopt) for fewer than two points
/// or when either side is constant.
inline std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("spearman: size mismatch");
  if (x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace infograv
