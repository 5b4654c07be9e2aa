#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace infograv::linalg {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline std::vector<double> matvec(const Matrix& m, std::span<const double> v) {
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), v);
  return out;
}

inline Matrix transpose_times_self(const Matrix& a) {
  Matrix g(a.cols(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      if (row[i] == 0.0) continue;
      for (std::size_t j = i; j < a.cols(); ++j) g(i, j) += row[i] * row[j];
    }
  }
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
};

struct PowerIterationOptions {
  std::size_t max_iter = 1000;
  double tol = 1e-12;
  std::uint64_t seed = 0x1f2e3d4c5b6a7988ULL;
};

namespace detail {

inline void normalize(std::vector<double>& v) {
  const double n = norm(v);
  if (n > 0.0)
    for (double& x : v) x /= n;
}

inline void orthogonalize(std::vector<double>& v, const std::vector<EigenPair>& found) {
  for (const auto& e : found) {
    const double p = dot(v, e.vector);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * e.vector[i];
  }
}

}  // namespace detail

/// Leading `k` eigenpairs (by magnitude) of a symmetric matrix, by power
/// iteration with Hotelling deflation A <- A - lambda v v^T. Start vectors come
/// from a seeded generator, so results are reproducible. Eigenvectors are
/// re-orthogonalized against earlier ones to keep the basis orthonormal when
/// the spectrum is degenerate.
inline std::vector<EigenPair> symmetric_top_eigen(Matrix a, std::size_t k,
                                                  const PowerIterationOptions& opt = {}) {
  if (a.rows() != a.cols()) throw ArgumentError("symmetric_top_eigen: matrix is not square");
  const std::size_t n = a.rows();
  k = std::min(k, n);
  Rng rng(opt.seed);
  std::vector<EigenPair> out;
  out.reserve(k);
  for (std::size_t e = 0; e < k; ++e) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    detail::orthogonalize(v, out);
    detail::normalize(v);
    double lambda = 0.0;
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
      std::vector<double> w = matvec(a, v);
      detail::orthogonalize(w, out);
      const double wn = norm(w);
      if (wn == 0.0) {
        lambda = 0.0;
        break;
      }
      const double next_lambda = dot(v, w);
      for (double& x : w) x /= wn;
      // Converged when the direction stops moving (up to sign).
      const double align = std::abs(dot(v, w));
      v = std::move(w);
      const bool settled = std::abs(next_lambda - lambda) <= opt.tol * std::max(1.0, std::abs(next_lambda));
      lambda = next_lambda;
      if (settled && 1.0 - align <= opt.tol) break;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) -= lambda * v[i] * v[j];
    out.push_back({lambda, std::move(v)});
  }
  return out;
}

/// Largest-magnitude eigenvalue of a small symmetric matrix. Iterates on A^2
/// (positive semi-definite, so no sign oscillation) and reads the sign from
/// the Rayleigh quotient of A.
inline double top_eigenvalue_by_magnitude(const Matrix& a, const PowerIterationOptions& opt = {
                                                               .max_iter = 20000, .tol = 1e-15}) {
  if (a.rows() != a.cols()) throw ArgumentError("top_eigenvalue_by_magnitude: matrix is not square");
  const std::size_t n = a.rows();
  if (n == 0) return 0.0;
  Rng rng(opt.seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  detail::normalize(v);
  double mu = 0.0;
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    std::vector<double> w = matvec(a, matvec(a, v));
    const double wn = norm(w);
    if (wn == 0.0) return 0.0;
    const double next_mu = dot(v, w);
    for (double& x : w) x /= wn;
    v = std::move(w);
    const bool done = std::abs(next_mu - mu) <= opt.tol * std::max(1.0, std::abs(next_mu));
    mu = next_mu;
    if (done) break;
  }
  const double magnitude = std::sqrt(std::max(mu, 0.0));
  const double rayleigh = dot(v, matvec(a, v));
  return rayleigh < 0.0 ? -magnitude : magnitude;
}

/// Cholesky solve of a symmetric positive definite system.
inline std::vector<double> cholesky_solve(Matrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > 0.0)) throw ArgumentError("cholesky_solve: matrix is not positive definite");
    const double l = std::sqrt(d);
    a(j, j) = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / l;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * b[k];
    b[i] = s / a(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a(k, i) * b[k];
    b[i] = s / a(i, i);
  }
  return b;
}

struct LeastSquaresResult {
  std::vector<double> x;
  /// True when the design was rank deficient and the ridge fallback was used.
  bool regularized = false;
};

/// Minimizes ||A x - b||. Full-column-rank systems go through Householder QR;
/// rank-deficient or underdetermined ones fall back to the ridge solution
/// (A^T A + ridge I) x = A^T b.
inline LeastSquaresResult least_squares(const Matrix& a, std::span<const double> b,
                                        double ridge = 1e-6, double rank_tol = 1e-10) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (b.size() != m) throw ArgumentError("least_squares: rhs size mismatch");

  auto ridge_solve = [&] {
    Matrix g = transpose_times_self(a);
    for (std::size_t i = 0; i < n; ++i) g(i, i) += ridge;
    std::vector<double> rhs(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      const auto row = a.row(r);
      for (std::size_t i = 0; i < n; ++i) rhs[i] += row[i] * b[r];
    }
    return LeastSquaresResult{cholesky_solve(std::move(g), std::move(rhs)), true};
  };

  if (m < n) return ridge_solve();

  Matrix r = a;
  std::vector<double> qtb(b.begin(), b.end());
  double max_diag = 0.0;
  std::vector<double> diag(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = j; i < m; ++i) s += r(i, j) * r(i, j);
    const double alpha = r(j, j) > 0.0 ? -std::sqrt(s) : std::sqrt(s);
    diag[j] = alpha;
    max_diag = std::max(max_diag, std::abs(alpha));
    if (s == 0.0) continue;
    // Householder vector u = x - alpha e1, stored in column j.
    r(j, j) -= alpha;
    double unorm2 = 0.0;
    for (std::size_t i = j; i < m; ++i) unorm2 += r(i, j) * r(i, j);
    if (unorm2 == 0.0) continue;
    for (std::size_t c = j + 1; c < n; ++c) {
      double p = 0.0;
      for (std::size_t i = j; i < m; ++i) p += r(i, j) * r(i, c);
      p = 2.0 * p / unorm2;
      for (std::size_t i = j; i < m; ++i) r(i, c) -= p * r(i, j);
    }
    double p = 0.0;
    for (std::size_t i = j; i < m; ++i) p += r(i, j) * qtb[i];
    p = 2.0 * p / unorm2;
    for (std::size_t i = j; i < m; ++i) qtb[i] -= p * r(i, j);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(diag[j]) <= rank_tol * std::max(max_diag, 1e-300)) return ridge_solve();
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t j = n; j-- > 0;) {
    double s = qtb[j];
    for (std::size_t c = j + 1; c < n; ++c) s -= r(j, c) * x[c];
    x[j] = s / diag[j];
  }
  return {std::move(x), false};
}

}  // namespace infograv::linalg
