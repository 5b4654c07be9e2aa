#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"
#include "linalg.hpp"
#include "ngram_model.hpp"
#include "token.hpp"

namespace infograv {

/// Token coordinates plus a k-nearest-neighbour graph over them.
class EmbeddingSpace {
 public:
  /// Builds the neighbour graph by brute force. Distance ties are broken by
  /// ascending token id, so the graph is a pure function of the coordinates.
  EmbeddingSpace(linalg::Matrix coords, std::size_t k) : coords_(std::move(coords)), k_(k) {
    const std::size_t n = coords_.rows();
    if (k_ < 1 || k_ + 1 > n) {
      throw ConfigError("neighbour count k must be in [1, |V|-1]");
    }
    for (double x : coords_.data()) {
      if (!std::isfinite(x)) throw ArgumentError("embedding coordinates must be finite");
    }
    neighbors_.resize(n * k_);
    std::vector<std::pair<double, std::uint32_t>> cand;
    cand.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      cand.clear();
      const auto xi = coords_.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const auto xj = coords_.row(j);
        double d2 = 0.0;
        for (std::size_t c = 0; c < xi.size(); ++c) d2 += (xi[c] - xj[c]) * (xi[c] - xj[c]);
        cand.emplace_back(d2, static_cast<std::uint32_t>(j));
      }
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k_), cand.end());
      for (std::size_t m = 0; m < k_; ++m) neighbors_[i * k_ + m] = TokenId{cand[m].second};
    }
  }

  std::size_t size() const noexcept { return coords_.rows(); }
  std::size_t dims() const noexcept { return coords_.cols(); }
  std::size_t k() const noexcept { return k_; }
  const linalg::Matrix& coords() const noexcept { return coords_; }
  std::span<const double> point(TokenId t) const { return coords_.row(t.index()); }

  /// Nearest first.
  std::span<const TokenId> neighbors(TokenId t) const {
    if (t.index() >= size()) throw ArgumentError("token id out of range");
    return {neighbors_.data() + t.index() * k_, k_};
  }

 private:
  linalg::Matrix coords_;
  std::size_t k_;
  std::vector<TokenId> neighbors_;
};

struct EmbeddingOptions {
  std::size_t dims = 32;
  std::size_t window = 2;
  std::size_t k = 16;
  std::size_t max_iter = 1000;
  double tol = 1e-10;
  std::uint64_t seed = 0x1f2e3d4c5b6a7988ULL;
};

/// Symmetric co-occurrence counts within `window` tokens. Pairs at distance d
/// are read off the (d+1)-gram table, so the usable window is capped at
/// order-1.
inline linalg::Matrix cooccurrence_matrix(const NgramModel& model, std::size_t window) {
  const std::size_t v = model.vocab_size();
  linalg::Matrix c(v, v);
  const std::size_t reach = std::min<std::size_t>(window, static_cast<std::size_t>(model.order() - 1));
  for (std::size_t d = 1; d <= reach; ++d) {
    for (const auto& [gram, n] : model.counts().tables[d]) {
      const double x = static_cast<double>(n);
      c(gram.front().index(), gram.back().index()) += x;
      c(gram.back().index(), gram.front().index()) += x;
    }
  }
  return c;
}

/// Positive pointwise mutual information: max(0, ln(C_ij N / (C_i. C_.j))).
inline linalg::Matrix ppmi_matrix(const linalg::Matrix& cooc) {
  const std::size_t v = cooc.rows();
  std::vector<double> row_sum(v, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < v; ++i) {
    for (double x : cooc.row(i)) row_sum[i] += x;
    total += row_sum[i];
  }
  linalg::Matrix p(v, v);
  if (total <= 0.0) return p;
  for (std::size_t i = 0; i < v; ++i) {
    for (std::size_t j = 0; j < v; ++j) {
      const double cij = cooc(i, j);
      if (cij <= 0.0) continue;
      p(i, j) = std::max(0.0, std::log(cij * total / (row_sum[i] * row_sum[j])));
    }
  }
  return p;
}

/// PPMI co-occurrence embedding: the leading `dims` eigenpairs of the PPMI
/// matrix (power iteration with deflation), token i placed at
/// x_i = (u_1[i] sqrt|l_1|, ..., u_d[i] sqrt|l_d|).
inline EmbeddingSpace build_embedding(const NgramModel& model, const EmbeddingOptions& opt = {}) {
  const std::size_t v = model.vocab_size();
  if (opt.dims < 2 || opt.dims > 256) throw ConfigError("embedding dims must be in [2, 256]");
  if (opt.k < 2) throw ConfigError("embedding neighbour count k must be >= 2");
  if (opt.window < 1) throw ConfigError("co-occurrence window must be >= 1");
  if (v < opt.dims + 1) {
    throw ConfigError("vocabulary of " + std::to_string(v) + " is too small for " +
                      std::to_string(opt.dims) + " dimensions");
  }
  if (model.order() < 2) throw ConfigError("embedding needs a model of order >= 2");

  const auto ppmi = ppmi_matrix(cooccurrence_matrix(model, opt.window));
  const auto eig = linalg::symmetric_top_eigen(
      ppmi, opt.dims, {.max_iter = opt.max_iter, .tol = opt.tol, .seed = opt.seed});

  linalg::Matrix coords(v, opt.dims);
  for (std::size_t e = 0; e < eig.size(); ++e) {
    const double s = std::sqrt(std::abs(eig[e].value));
    for (std::size_t i = 0; i < v; ++i) coords(i, e) = eig[e].vector[i] * s;
  }
  return EmbeddingSpace(std::move(coords), std::min(opt.k, v - 1));
}

}  // namespace infograv
