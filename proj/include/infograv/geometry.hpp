#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "embedding.hpp"
#include "error.hpp"
#include "linalg.hpp"
#include "potential.hpp"

namespace infograv {

// Local differential geometry of a potential field over an embedding. Each
// token's neighbourhood is its k-NN set; derivatives come from least-squares
// fits of the potential differences phi(x_j) - phi(x_t) against offsets
// x_j - x_t.

inline constexpr double kGradientRidge = 1e-6;

struct GradientFit {
  /// grad phi at the token; information gravity is its negation.
  std::vector<double> gradient;
  double gradient_norm = 0.0;
  /// Design matrix was rank deficient; the ridge fit was returned instead.
  bool degenerate = false;

  std::vector<double> gravity() const {
    std::vector<double> g(gradient.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = -gradient[i];
    return g;
  }
};

struct HessianFit {
  double top_eigenvalue = 0.0;
  /// Neighbourhood was smaller than d(d+3)/2, so only the diagonal was fitted.
  bool diagonal_only = false;
  bool degenerate = false;
};

struct LocalGeometry {
  TokenId token;
  std::vector<double> gradient;
  double gradient_norm = 0.0;
  bool gradient_degenerate = false;
  /// Empty when the neighbourhood is too small for any quadratic fit.
  std::optional<double> top_hessian_eigenvalue;
  bool hessian_diagonal_only = false;
};

namespace detail {

inline void check_field_space(const PotentialField& field, const EmbeddingSpace& space, TokenId t) {
  if (field.size() != space.size()) throw ArgumentError("field and embedding sizes differ");
  if (t.index() >= space.size()) throw ArgumentError("token id out of range");
}

}  // namespace detail

/// Linear fit phi(x) ~ phi(x_t) + g^T (x - x_t) over the token's neighbours.
inline GradientFit local_gradient(const PotentialField& field, const EmbeddingSpace& space, TokenId t) {
  detail::check_field_space(field, space, t);
  const auto nbrs = space.neighbors(t);
  const auto xt = space.point(t);
  const std::size_t d = space.dims();
  linalg::Matrix a(nbrs.size(), d);
  std::vector<double> b(nbrs.size());
  for (std::size_t r = 0; r < nbrs.size(); ++r) {
    const auto xj = space.point(nbrs[r]);
    for (std::size_t c = 0; c < d; ++c) a(r, c) = xj[c] - xt[c];
    b[r] = field[nbrs[r]] - field[t];
  }
  auto ls = linalg::least_squares(a, b, kGradientRidge);
  GradientFit fit;
  fit.gradient_norm = linalg::norm(ls.x);
  fit.gradient = std::move(ls.x);
  fit.degenerate = ls.regularized;
  return fit;
}

/// Quadratic fit phi(x) - phi(x_t) ~ g^T dx + 1/2 dx^T H dx, returning the
/// largest-magnitude eigenvalue of H. With at least d(d+3)/2 neighbours every
/// entry of H is fitted; otherwise only its diagonal.
inline HessianFit local_hessian(const PotentialField& field, const EmbeddingSpace& space, TokenId t) {
  detail::check_field_space(field, space, t);
  const auto nbrs = space.neighbors(t);
  const std::size_t d = space.dims();
  if (nbrs.size() < d + 2) {
    throw InsufficientDataError("hessian fit needs at least " + std::to_string(d + 2) +
                                " neighbours, have " + std::to_string(nbrs.size()));
  }
  const bool full = nbrs.size() >= d * (d + 3) / 2;
  const std::size_t quad_terms = full ? d * (d + 1) / 2 : d;
  const auto xt = space.point(t);

  linalg::Matrix a(nbrs.size(), d + quad_terms);
  std::vector<double> b(nbrs.size());
  std::vector<double> dx(d);
  for (std::size_t r = 0; r < nbrs.size(); ++r) {
    const auto xj = space.point(nbrs[r]);
    for (std::size_t c = 0; c < d; ++c) {
      dx[c] = xj[c] - xt[c];
      a(r, c) = dx[c];
    }
    std::size_t col = d;
    if (full) {
      for (std::size_t i = 0; i < d; ++i) {
        a(r, col++) = 0.5 * dx[i] * dx[i];
        for (std::size_t j = i + 1; j < d; ++j) a(r, col++) = dx[i] * dx[j];
      }
    } else {
      for (std::size_t i = 0; i < d; ++i) a(r, col++) = 0.5 * dx[i] * dx[i];
    }
    b[r] = field[nbrs[r]] - field[t];
  }
  const auto ls = linalg::least_squares(a, b, kGradientRidge);

  linalg::Matrix h(d, d);
  std::size_t col = d;
  if (full) {
    for (std::size_t i = 0; i < d; ++i) {
      h(i, i) = ls.x[col++];
      for (std::size_t j = i + 1; j < d; ++j) {
        h(i, j) = ls.x[col];
        h(j, i) = ls.x[col];
        ++col;
      }
    }
  } else {
    for (std::size_t i = 0; i < d; ++i) h(i, i) = ls.x[col++];
  }
  return {linalg::top_eigenvalue_by_magnitude(h), !full, ls.regularized};
}

inline double local_hessian_eig(const PotentialField& field, const EmbeddingSpace& space, TokenId t) {
  return local_hessian(field, space, t).top_eigenvalue;
}

/// Gradient for one token, plus the Hessian eigenvalue when the
/// neighbourhood supports it.
inline LocalGeometry local_geometry(const PotentialField& field, const EmbeddingSpace& space, TokenId t) {
  auto g = local_gradient(field, space, t);
  LocalGeometry out;
  out.token = t;
  out.gradient = std::move(g.gradient);
  out.gradient_norm = g.gradient_norm;
  out.gradient_degenerate = g.degenerate;
  if (space.k() >= space.dims() + 2) {
    const auto h = local_hessian(field, space, t);
    out.top_hessian_eigenvalue = h.top_eigenvalue;
    out.hessian_diagonal_only = h.diagonal_only;
  }
  return out;
}

/// Population variance of the gradient norm across every token.
inline double curvature_metric(const PotentialField& field, const EmbeddingSpace& space) {
  const std::size_t n = space.size();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = local_gradient(field, space, TokenId{i}).gradient_norm;
  double mean = 0.0;
  for (double x : norms) mean += x;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : norms) var += (x - mean) * (x - mean);
  return var / static_cast<double>(n);
}

}  // namespace infograv
