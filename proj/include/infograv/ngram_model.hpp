#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <istream>
#include <iterator>
#include <map>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "distribution.hpp"
#include "error.hpp"
#include "token.hpp"
#include "tokenizer.hpp"
#include "vocabulary.hpp"

namespace infograv {

/// Lexicographic order over token sequences; transparent so spans can probe
/// maps keyed by TokenSeq without allocating.
struct SeqLess {
  using is_transparent = void;
  template <class A, class B>
  bool operator()(const A& a, const B& b) const {
    return std::lexicographical_compare(std::begin(a), std::end(a), std::begin(b), std::end(b));
  }
};

using NgramTable = std::map<TokenSeq, std::uint64_t, SeqLess>;

/// Raw n-gram counts for orders 1..order. `tables[k-1]` holds the k-grams.
struct NgramCounts {
  int order = 0;
  std::vector<NgramTable> tables;
  std::uint64_t total_tokens = 0;

  bool contains(std::span<const TokenId> gram) const {
    if (gram.empty() || gram.size() > tables.size()) return false;
    const auto& t = tables[gram.size() - 1];
    return t.find(gram) != t.end();
  }
};

/// Training-corpus statistics: smoothed unigrams plus the observed n-grams.
class BaselineStats {
 public:
  BaselineStats(std::vector<double> unigram, std::shared_ptr<const NgramCounts> counts)
      : unigram_(std::move(unigram)), counts_(std::move(counts)) {
    for (double p : unigram_) {
      if (!(p > 0.0) || !std::isfinite(p)) throw ArgumentError("baseline unigram must be positive");
    }
  }

  /// Baseline with no n-gram tables, for callers that only need unigrams.
  explicit BaselineStats(std::vector<double> unigram)
      : BaselineStats(std::move(unigram), std::make_shared<NgramCounts>()) {}

  std::span<const double> unigram() const noexcept { return unigram_; }
  double unigram(TokenId t) const { return unigram_.at(t.index()); }
  std::uint64_t total_tokens() const noexcept { return counts_->total_tokens; }
  int max_order() const noexcept { return static_cast<int>(counts_->tables.size()); }
  bool observed(std::span<const TokenId> gram) const { return counts_->contains(gram); }

 private:
  std::vector<double> unigram_;
  std::shared_ptr<const NgramCounts> counts_;
};

/// Anything that yields a next-token distribution for a context.
template <class M>
concept ConditionalModel = requires(const M& m, std::span<const TokenId> ctx) {
  { m.next_dist(ctx) } -> std::convertible_to<DistributionView>;
  { m.vocab_size() } -> std::convertible_to<std::size_t>;
};

/// Interpolated absolute-discounting n-gram model:
///
///   P_k(w | h) = max(c(h w) - D, 0) / c(h) + D N1+(h .) / c(h) * P_{k-1}(w | h')
///
/// where h' drops the oldest history token and unseen histories fall through
/// to the next lower order. The unigram level interpolates with the uniform
/// distribution the same way, so nothing is zero before the floor is applied.
class NgramModel {
 public:
  static constexpr int kMaxOrder = 5;
  static constexpr int kDefaultOrder = 3;
  static constexpr double kDefaultDiscount = 0.75;

  NgramModel(int order, double discount, Vocabulary vocab, std::shared_ptr<const NgramCounts> counts)
      : order_(order), discount_(discount), vocab_(std::move(vocab)), counts_(std::move(counts)) {
    validate_settings(order_, discount_);
    if (!counts_ || counts_->order != order_ ||
        counts_->tables.size() != static_cast<std::size_t>(order_)) {
      throw ConfigError("count tables do not match model order");
    }
    if (counts_->total_tokens == 0) throw TrainingError("model has no training tokens");
    build_index();
  }

  static void validate_settings(int order, double discount) {
    if (order < 1 || order > kMaxOrder) {
      throw ConfigError("order must be in [1, " + std::to_string(kMaxOrder) + "], got " +
                        std::to_string(order));
    }
    if (!(discount > 0.0 && discount < 1.0)) {
      throw ConfigError("discount must be in (0, 1)");
    }
  }

  int order() const noexcept { return order_; }
  double discount() const noexcept { return discount_; }
  const Vocabulary& vocab() const noexcept { return vocab_; }
  std::size_t vocab_size() const noexcept { return vocab_.size(); }
  const NgramCounts& counts() const noexcept { return *counts_; }
  const BaselineStats& baseline() const noexcept { return *baseline_; }

  TokenSeq encode(std::string_view text) const { return vocab_.encode(tokenize(text)); }

  /// Full predictive distribution. Only the last order-1 tokens of `context`
  /// matter; unseen histories back off, so this never fails.
  DistributionView next_dist(std::span<const TokenId> context) const {
    std::vector<double> p = unigram_;
    const auto hist = history_of(context);
    for (std::size_t k = 1; k <= hist.size(); ++k) {
      const auto* hs = find_history(hist.subspan(hist.size() - k));
      if (hs == nullptr) break;
      for (double& x : p) x *= hs->backoff_weight;
      for (const auto& [w, disc] : hs->followers) p[w.index()] += disc;
    }
    apply_floor(p);
    return DistributionView(std::move(p), TokenSeq(context.begin(), context.end()),
                            DistSource::BuiltinModel);
  }

  /// Single entry of next_dist(context), computed with the same arithmetic.
  double probability(std::span<const TokenId> context, TokenId w) const {
    if (w.index() >= vocab_.size()) throw ArgumentError("token id out of range");
    double p = unigram_[w.index()];
    const auto hist = history_of(context);
    for (std::size_t k = 1; k <= hist.size(); ++k) {
      const auto* hs = find_history(hist.subspan(hist.size() - k));
      if (hs == nullptr) break;
      p *= hs->backoff_weight;
      auto it = std::lower_bound(hs->followers.begin(), hs->followers.end(), w,
                                 [](const auto& f, TokenId t) { return f.first < t; });
      if (it != hs->followers.end() && it->first == w) p += it->second;
    }
    const double scale = 1.0 - static_cast<double>(vocab_.size()) * kProbFloor;
    return scale * p + kProbFloor;
  }

 private:
  struct HistoryStats {
    double backoff_weight = 0.0;
    // (token, discounted mass) sorted by token id.
    std::vector<std::pair<TokenId, double>> followers;
  };

  std::span<const TokenId> history_of(std::span<const TokenId> context) const {
    const std::size_t n = std::min(context.size(), static_cast<std::size_t>(order_ - 1));
    return context.subspan(context.size() - n);
  }

  const HistoryStats* find_history(std::span<const TokenId> h) const {
    const auto& idx = history_index_[h.size() - 1];
    auto it = idx.find(h);
    return it == idx.end() ? nullptr : &it->second;
  }

  void build_index() {
    const double v = static_cast<double>(vocab_.size());
    const auto& uni = counts_->tables[0];
    double n = 0.0;
    for (const auto& [g, c] : uni) {
      if (g.size() != 1 || g[0].index() >= vocab_.size() || c == 0) {
        throw ConfigError("malformed unigram table");
      }
      n += static_cast<double>(c);
    }
    unigram_.assign(vocab_.size(), 0.0);
    const double lambda = discount_ * static_cast<double>(uni.size()) / n;
    for (auto& p : unigram_) p = lambda / v;
    for (const auto& [g, c] : uni) {
      unigram_[g[0].index()] += std::max(static_cast<double>(c) - discount_, 0.0) / n;
    }

    history_index_.assign(static_cast<std::size_t>(std::max(order_ - 1, 0)), {});
    for (int k = 2; k <= order_; ++k) {
      // Gather per-history totals first; followers arrive in token order
      // because the table is sorted lexicographically.
      std::map<TokenSeq, std::pair<double, std::vector<std::pair<TokenId, std::uint64_t>>>, SeqLess>
          raw;
      for (const auto& [g, c] : counts_->tables[k - 1]) {
        if (g.size() != static_cast<std::size_t>(k) || c == 0) {
          throw ConfigError("malformed " + std::to_string(k) + "-gram table");
        }
        for (TokenId t : g) {
          if (t.index() >= vocab_.size()) throw ConfigError("n-gram token id out of range");
        }
        auto& slot = raw[TokenSeq(g.begin(), g.end() - 1)];
        slot.first += static_cast<double>(c);
        slot.second.emplace_back(g.back(), c);
      }
      auto& idx = history_index_[k - 2];
      for (auto& [h, rec] : raw) {
        const double total = rec.first;
        HistoryStats hs;
        hs.backoff_weight = discount_ * static_cast<double>(rec.second.size()) / total;
        hs.followers.reserve(rec.second.size());
        for (const auto& [w, c] : rec.second) {
          hs.followers.emplace_back(w, std::max(static_cast<double>(c) - discount_, 0.0) / total);
        }
        idx.emplace(h, std::move(hs));
      }
    }

    baseline_ = std::make_shared<const BaselineStats>(unigram_, counts_);
  }

  int order_;
  double discount_;
  Vocabulary vocab_;
  std::shared_ptr<const NgramCounts> counts_;
  std::vector<double> unigram_;
  std::vector<std::map<TokenSeq, HistoryStats, SeqLess>> history_index_;
  std::shared_ptr<const BaselineStats> baseline_;
};

/// Counts every k-gram (k = 1..order) of an encoded token stream.
inline NgramCounts count_ngrams(std::span<const TokenId> stream, int order) {
  NgramCounts counts;
  counts.order = order;
  counts.tables.resize(static_cast<std::size_t>(order));
  counts.total_tokens = stream.size();
  for (std::size_t i = 0; i < stream.size(); ++i) {
    for (int k = 1; k <= order && i + k <= stream.size(); ++k) {
      ++counts.tables[k - 1][TokenSeq(stream.begin() + i, stream.begin() + i + k)];
    }
  }
  return counts;
}

/// Trains on an already tokenized corpus treated as one continuous stream.
inline NgramModel train(std::span<const std::string> tokens, int order = NgramModel::kDefaultOrder,
                        double discount = NgramModel::kDefaultDiscount) {
  NgramModel::validate_settings(order, discount);
  if (tokens.empty()) throw TrainingError("training corpus contains no tokens");
  Vocabulary vocab = Vocabulary::from_tokens(tokens);
  const TokenSeq stream = vocab.encode(tokens);
  auto counts = std::make_shared<const NgramCounts>(count_ngrams(stream, order));
  return NgramModel(order, discount, std::move(vocab), std::move(counts));
}

inline NgramModel train(std::istream& corpus, int order = NgramModel::kDefaultOrder,
                        double discount = NgramModel::kDefaultDiscount) {
  std::ostringstream buf;
  buf << corpus.rdbuf();
  const auto toks = tokenize(buf.str());
  return train(std::span<const std::string>(toks), order, discount);
}

inline NgramModel train_text(std::string_view text, int order = NgramModel::kDefaultOrder,
                             double discount = NgramModel::kDefaultDiscount) {
  const auto toks = tokenize(text);
  return train(std::span<const std::string>(toks), order, discount);
}

/// Sum of log P(token_i | context + tokens_<i) in nats.
template <ConditionalModel M>
double sequence_logprob(const M& model, std::span<const TokenId> tokens,
                        std::span<const TokenId> context) {
  if (tokens.empty()) throw ArgumentError("sequence_logprob: empty token sequence");
  TokenSeq ctx(context.begin(), context.end());
  ctx.reserve(context.size() + tokens.size());
  double lp = 0.0;
  for (TokenId t : tokens) {
    if constexpr (requires { model.probability(std::span<const TokenId>(ctx), t); }) {
      lp += std::log(model.probability(std::span<const TokenId>(ctx), t));
    } else {
      lp += std::log(model.next_dist(std::span<const TokenId>(ctx))[t]);
    }
    ctx.push_back(t);
  }
  return lp;
}

}  // namespace infograv
