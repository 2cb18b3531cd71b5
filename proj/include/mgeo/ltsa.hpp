#pragma once

// Local Tangent Space Alignment.
//
// Every point and its k nearest neighbours form a local patch. The top-d
// principal directions of the centered patch span its tangent coordinates;
// the alignment matrix accumulates, per patch, the projector onto the
// orthogonal complement of {1, tangent coordinates}. Global coordinates are
// the bottom eigenvectors of that matrix with the constant vector removed.

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgeo/datasets.hpp"
#include "mgeo/linalg.hpp"

namespace mgeo {

struct LtsaConfig {
  std::size_t k = 12;       // neighbours per patch, excluding the point itself
  std::size_t d = 2;        // target dimension
  double eig_floor = 1e-6;  // max residual of the constant vector outside the bottom eigenspace
  unsigned threads = 1;
};

enum class EmbeddingSource { ltsa, encoder };

struct Embedding {
  Matrix coords;  // N x d
  EmbeddingSource source = EmbeddingSource::ltsa;
};

namespace detail {

inline void validate_ltsa(const PointCloud& cloud, const LtsaConfig& cfg) {
  if (cfg.d == 0) throw std::invalid_argument("ltsa: d must be >= 1");
  if (cfg.k <= cfg.d) {
    throw std::invalid_argument("ltsa: k = " + std::to_string(cfg.k) + " must exceed d = " +
                                std::to_string(cfg.d));
  }
  if (cloud.size() < cfg.k + 1) {
    throw std::invalid_argument("ltsa: need at least k+1 = " + std::to_string(cfg.k + 1) +
                                " points, got " + std::to_string(cloud.size()));
  }
}

inline void require_connected(const NeighborTable& nbrs) {
  const auto sizes = component_sizes(nbrs);
  if (sizes.size() > 1) {
    std::ostringstream msg;
    msg << "ltsa: neighbourhood graph is disconnected; component sizes:";
    for (std::size_t s : sizes) msg << ' ' << s;
    throw std::runtime_error(msg.str());
  }
}

inline Matrix assemble_alignment(const Matrix& points, const NeighborTable& nbrs, std::size_t d) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  Matrix b(n, n);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i) {
    idx.assign(1, i);
    idx.insert(idx.end(), nbrs[i].begin(), nbrs[i].end());
    const std::size_t m = idx.size();
    Matrix local(m, dim);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < dim; ++c) local(r, c) = points(idx[r], c);
    local = center_columns(std::move(local));
    const EigenResult gram = sym_eig(matmul_nt(local, local));
    // Top-d eigenvectors of the Gram matrix (values ascend, so take the tail).
    Matrix g(m, d);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < d; ++c) g(r, c) = gram.vectors(r, m - 1 - c);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        double w = (r == c ? 1.0 : 0.0) - inv_m;
        for (std::size_t t = 0; t < d; ++t) w -= g(r, t) * g(c, t);
        b(idx[r], idx[c]) += w;
      }
    }
  }
  return b;
}

// Orientation of the null-space chart. The bottom eigenvectors determine the
// chart only up to an affine map; a metric M fitted so that neighbour offsets
// satisfy Δyᵀ·M·Δy ≈ ‖Δx‖² recovers relative scale, and principal axes of the
// metric-corrected chart fix the rotation (largest extent first).
inline Matrix principal_axes(const Matrix& y, const Matrix& points, const NeighborTable& nbrs) {
  const std::size_t n = y.rows();
  const std::size_t d = y.cols();
  const std::size_t unknowns = d * (d + 1) / 2;
  std::size_t pairs = 0;
  for (const auto& row : nbrs) pairs += row.size();
  Matrix design(pairs, unknowns);
  Matrix target(pairs, 1);
  std::size_t r = 0;
  std::vector<double> dy(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : nbrs[i]) {
      for (std::size_t a = 0; a < d; ++a) dy[a] = y(j, a) - y(i, a);
      std::size_t u = 0;
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t c = a; c < d; ++c) design(r, u++) = (a == c ? 1.0 : 2.0) * dy[a] * dy[c];
      target(r, 0) = squared_distance(points.row(i), points.row(j));
      ++r;
    }
  }
  Matrix metric(d, d);
  try {
    const Matrix sol = lstsq(design, target);
    std::size_t u = 0;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t c = a; c < d; ++c) metric(a, c) = metric(c, a) = sol(u++, 0);
  } catch (const std::runtime_error&) {
    metric = Matrix::identity(d);
  }
  const EigenResult me = sym_eig(metric);
  const double top = std::max(me.values.back(), 1e-300);
  Matrix root(d, d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t c = 0; c < d; ++c) {
      double s = 0.0;
      for (std::size_t t = 0; t < d; ++t)
        s += me.vectors(a, t) * std::sqrt(std::max(me.values[t], 1e-12 * top)) * me.vectors(c, t);
      root(a, c) = s;
    }
  const Matrix scaled = matmul(y, root);
  const EigenResult cov = sym_eig(matmul_tn(scaled, scaled));
  Matrix rot(d, d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t c = 0; c < d; ++c) rot(a, c) = cov.vectors(a, d - 1 - c);
  return matmul(scaled, rot);
}

// Unit covariance per column and the sign convention: each column's
// largest-magnitude entry is positive.
inline void normalize_chart(Matrix& z) {
  const std::size_t n = z.rows();
  z = center_columns(std::move(z));
  for (std::size_t c = 0; c < z.cols(); ++c) {
    double ss = 0.0;
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t r = 0; r < n; ++r) {
      ss += z(r, c) * z(r, c);
      if (std::abs(z(r, c)) > best) {
        best = std::abs(z(r, c));
        arg = r;
      }
    }
    const double scale = ss > 0.0 ? std::sqrt(static_cast<double>(n) / ss) : 1.0;
    const double sign = z(arg, c) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) z(r, c) *= sign * scale;
  }
}

}  // namespace detail

inline Matrix alignment_matrix(const PointCloud& cloud, const LtsaConfig& cfg) {
  detail::validate_ltsa(cloud, cfg);
  const auto nbrs = knn(cloud.points, cfg.k, cfg.threads);
  detail::require_connected(nbrs);
  return detail::assemble_alignment(cloud.points, nbrs, cfg.d);
}

inline Embedding ltsa_embed(const PointCloud& cloud, const LtsaConfig& cfg) {
  detail::validate_ltsa(cloud, cfg);
  const auto nbrs = knn(cloud.points, cfg.k, cfg.threads);
  detail::require_connected(nbrs);
  const Matrix b = detail::assemble_alignment(cloud.points, nbrs, cfg.d);
  const std::size_t d = cfg.d;

  const EigenResult bottom = smallest_eigenpairs(b, d + 1);

  // Remove the constant direction from the (d+1)-dimensional bottom space.
  const Matrix centered = center_columns(bottom.vectors);
  const EigenResult spread = sym_eig(matmul_tn(centered, centered));
  if (spread.values.front() > cfg.eig_floor) {
    std::ostringstream msg;
    msg << "ltsa: constant vector not found in the bottom eigenspace (residual "
        << spread.values.front() << " > eig_floor " << cfg.eig_floor << ")";
    throw std::runtime_error(msg.str());
  }
  Matrix keep(d + 1, d);
  for (std::size_t r = 0; r <= d; ++r)
    for (std::size_t c = 0; c < d; ++c) keep(r, c) = spread.vectors(r, c + 1);
  const Matrix y = matmul(centered, keep);

  Embedding out;
  out.coords = detail::principal_axes(y, cloud.points, nbrs);
  detail::normalize_chart(out.coords);
  out.source = EmbeddingSource::ltsa;
  return out;
}

}  // namespace mgeo
