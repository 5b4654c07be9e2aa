#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "embedding.hpp"
#include "error.hpp"
#include "linalg.hpp"
#include "potential.hpp"

namespace infograv {

/// Tokens projected onto the top two principal axes of an embedding.
struct Projection2D {
  std::array<std::vector<double>, 2> basis;
  std::vector<double> mean;
  std::vector<std::array<double, 2>> points;
};

inline Projection2D project_top2(const EmbeddingSpace& space) {
  const auto& x = space.coords();
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  Projection2D pr;
  pr.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) pr.mean[c] += x(i, c);
  for (double& m : pr.mean) m /= static_cast<double>(n);

  linalg::Matrix centered(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) centered(i, c) = x(i, c) - pr.mean[c];
  const auto cov = linalg::transpose_times_self(centered);
  const auto eig = linalg::symmetric_top_eigen(cov, 2);

  pr.basis[0] = eig[0].vector;
  pr.basis[1] = eig.size() > 1 ? eig[1].vector : std::vector<double>(d, 0.0);
  // Gram-Schmidt pass so the basis is orthonormal even for a flat spectrum.
  auto unit = [](std::vector<double>& v) {
    const double nv = linalg::norm(v);
    if (nv > 0.0)
      for (double& c : v) c /= nv;
  };
  unit(pr.basis[0]);
  const double p = linalg::dot(pr.basis[0], pr.basis[1]);
  for (std::size_t c = 0; c < d; ++c) pr.basis[1][c] -= p * pr.basis[0][c];
  if (linalg::norm(pr.basis[1]) < 1e-12) {
    // Degenerate second axis: take the coordinate axis least aligned with the first.
    std::size_t best = 0;
    for (std::size_t c = 1; c < d; ++c)
      if (std::abs(pr.basis[0][c]) < std::abs(pr.basis[0][best])) best = c;
    pr.basis[1].assign(d, 0.0);
    pr.basis[1][best] = 1.0;
    const double q = pr.basis[0][best];
    for (std::size_t c = 0; c < d; ++c) pr.basis[1][c] -= q * pr.basis[0][c];
  }
  unit(pr.basis[1]);

  pr.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 2; ++a) pr.points[i][a] = linalg::dot(centered.row(i), pr.basis[a]);
  }
  return pr;
}

struct LandscapeCell {
  std::size_t count = 0;
  double mean_phi = 0.0;

  bool occupied() const noexcept { return count > 0; }
};

/// g x g grid of mean potentials; cell (x, y) lives at cells[y * g + x].
struct LandscapeGrid {
  std::size_t resolution = 0;
  std::vector<LandscapeCell> cells;
  std::array<std::vector<double>, 2> basis;

  const LandscapeCell& at(std::size_t x, std::size_t y) const { return cells.at(y * resolution + x); }

  std::size_t occupied_count() const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const auto& c) { return c.occupied(); }));
  }

  /// max - min over occupied cells; 0 when nothing is occupied.
  double value_spread() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : cells) {
      if (!c.occupied()) continue;
      lo = std::min(lo, c.mean_phi);
      hi = std::max(hi, c.mean_phi);
    }
    return hi >= lo ? hi - lo : 0.0;
  }
};

inline constexpr std::size_t kMinResolution = 8;
inline constexpr std::size_t kMaxResolution = 1024;

/// Bins every token's projected position and averages, per cell, the token
/// potentials averaged across `fields`.
inline LandscapeGrid landscape_grid(std::span<const PotentialField> fields, const EmbeddingSpace& space,
                                    std::size_t resolution) {
  if (fields.empty()) throw ArgumentError("landscape_grid needs at least one field");
  if (resolution < kMinResolution || resolution > kMaxResolution) {
    throw ArgumentError("landscape resolution must be in [8, 1024]");
  }
  for (const auto& f : fields) {
    if (f.size() != space.size()) throw ArgumentError("field and embedding sizes differ");
  }
  const auto pr = project_top2(space);
  const std::size_t n = space.size();

  std::array<double, 2> lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  std::array<double, 2> hi{-lo[0], -lo[1]};
  for (const auto& p : pr.points) {
    for (int a = 0; a < 2; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  auto bin = [&](double v, int a) -> std::size_t {
    const double span = hi[a] - lo[a];
    if (!(span > 0.0)) return 0;
    const double f = (v - lo[a]) / span * static_cast<double>(resolution);
    return std::min(static_cast<std::size_t>(std::max(f, 0.0)), resolution - 1);
  };

  LandscapeGrid g;
  g.resolution = resolution;
  g.cells.assign(resolution * resolution, {});
  g.basis = pr.basis;
  std::vector<double> sums(g.cells.size(), 0.0);
  const double nf = static_cast<double>(fields.size());
  for (std::size_t i = 0; i < n; ++i) {
    double phi = 0.0;
    for (const auto& f : fields) phi += f.phi()[i];
    phi /= nf;
    const std::size_t idx = bin(pr.points[i][1], 1) * resolution + bin(pr.points[i][0], 0);
    sums[idx] += phi;
    ++g.cells[idx].count;
  }
  for (std::size_t c = 0; c < g.cells.size(); ++c) {
    if (g.cells[c].count) g.cells[c].mean_phi = sums[c] / static_cast<double>(g.cells[c].count);
  }
  return g;
}

/// Per-cell spread (max - min) across grids built on the same embedding.
/// Identical inputs give an all-zero map.
inline LandscapeGrid difference_map(std::span<const LandscapeGrid> grids) {
  if (grids.empty()) throw ArgumentError("difference_map needs at least one grid");
  LandscapeGrid out = grids[0];
  for (const auto& g : grids) {
    if (g.resolution != out.resolution) throw ArgumentError("difference_map: resolution mismatch");
  }
  for (std::size_t c = 0; c < out.cells.size(); ++c) {
    if (!out.cells[c].occupied()) continue;
    double lo = out.cells[c].mean_phi;
    double hi = lo;
    for (const auto& g : grids) {
      lo = std::min(lo, g.cells[c].mean_phi);
      hi = std::max(hi, g.cells[c].mean_phi);
    }
    out.cells[c].mean_phi = hi - lo;
  }
  return out;
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// One row per occupied cell: cell_x,cell_y,mean_phi,count.
inline std::string landscape_csv(const LandscapeGrid& g) {
  std::string out = "cell_x,cell_y,mean_phi,count\n";
  for (std::size_t y = 0; y < g.resolution; ++y) {
    for (std::size_t x = 0; x < g.resolution; ++x) {
      const auto& c = g.at(x, y);
      if (!c.occupied()) continue;
      out += std::to_string(x) + ',' + std::to_string(y) + ',' + format_number(c.mean_phi) + ',' +
             std::to_string(c.count) + '\n';
    }
  }
  return out;
}

/// Standalone grayscale heatmap. Darker cells hold lower potential; empty
/// cells show the pale background.
inline std::string landscape_svg(const LandscapeGrid& g, const std::string& title = "") {
  const std::size_t px = std::max<std::size_t>(1, 512 / g.resolution);
  const std::size_t side = px * g.resolution;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : g.cells) {
    if (!c.occupied()) continue;
    lo = std::min(lo, c.mean_phi);
    hi = std::max(hi, c.mean_phi);
  }
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(side) + "\" height=\"" +
       std::to_string(side) + "\" viewBox=\"0 0 " + std::to_string(side) + ' ' + std::to_string(side) +
       "\" shape-rendering=\"crispEdges\">\n";
  if (!title.empty()) s += "<title>" + title + "</title>\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"#e8eef6\"/>\n";
  for (std::size_t y = 0; y < g.resolution; ++y) {
    for (std::size_t x = 0; x < g.resolution; ++x) {
      const auto& c = g.at(x, y);
      if (!c.occupied()) continue;
      const double t = hi > lo ? (c.mean_phi - lo) / (hi - lo) : 0.0;
      const int level = static_cast<int>(std::lround(230.0 * t));
      char fill[8];
      std::snprintf(fill, sizeof fill, "#%02x%02x%02x", level, level, level);
      // SVG's y axis points down; flip so the second principal axis points up.
      const std::size_t row = g.resolution - 1 - y;
      s += "<rect x=\"" + std::to_string(x * px) + "\" y=\"" + std::to_string(row * px) + "\" width=\"" +
           std::to_string(px) + "\" height=\"" + std::to_string(px) + "\" fill=\"" + fill + "\"/>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

}  // namespace infograv
