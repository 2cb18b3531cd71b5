#pragma once

// Ground truth and evaluation metrics for learned geodesics: closed-form
// sphere and swiss-roll geodesics, graph shortest paths, polyline length and
// spacing uniformity, tangential-acceleration diagnostics, and affine
// Procrustes alignment of charts.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgeo/curve.hpp"
#include "mgeo/datasets.hpp"
#include "mgeo/decoder.hpp"
#include "mgeo/linalg.hpp"
#include "mgeo/losses.hpp"

namespace mgeo {

struct GreatCircle {
  Matrix points;   // m+1 points from p0 to p1
  double length = 0.0;
};

// Minor arc between two points of a sphere centred at the origin.
inline GreatCircle great_circle(std::span<const double> p0, std::span<const double> p1, std::size_t m) {
  if (p0.size() != p1.size() || p0.empty()) throw std::invalid_argument("great_circle: dimension mismatch");
  if (m == 0) throw std::invalid_argument("great_circle: need m >= 1");
  const double r = norm2(p0);
  if (!(r > 0.0)) throw std::invalid_argument("great_circle: endpoint at the centre");
  if (std::abs(norm2(p1) - r) > 1e-9 * std::max(1.0, r)) {
    throw std::invalid_argument("great_circle: endpoints are not on a common sphere");
  }
  const double chord = distance(p0, p1);
  if (chord >= 2.0 * r * (1.0 - 1e-12)) throw std::invalid_argument("great_circle: geodesic not unique (antipodal endpoints)");
  const double theta = 2.0 * std::asin(std::min(1.0, chord / (2.0 * r)));
  GreatCircle out;
  out.length = r * theta;
  out.points = Matrix(m + 1, p0.size());
  const double st = std::sin(theta);
  for (std::size_t i = 0; i <= m; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(m);
    double w0 = 1.0 - s;
    double w1 = s;
    if (st > 1e-12) {
      w0 = std::sin((1.0 - s) * theta) / st;
      w1 = std::sin(s * theta) / st;
    }
    for (std::size_t c = 0; c < p0.size(); ++c) out.points(i, c) = w0 * p0[c] + w1 * p1[c];
  }
  return out;
}

// Length of the straight segment between two intrinsic (arclength, height)
// coordinates; the roll is isometric to a flat strip.
inline double swissroll_geodesic(std::span<const double> q0, std::span<const double> q1,
                                 const SwissRollParams& params) {
  if (q0.size() != 2 || q1.size() != 2) throw std::invalid_argument("swissroll_geodesic: need 2-D intrinsic points");
  const double total = swissroll_arclength(params.t_max, params);
  const double tol = 1e-9 * std::max(1.0, total);
  for (auto q : {q0, q1}) {
    if (q[0] < -tol || q[0] > total + tol || q[1] < -tol || q[1] > params.height + tol) {
      throw std::invalid_argument("swissroll_geodesic: point outside the sampled parameter range");
    }
  }
  return distance(q0, q1);
}

inline std::vector<double> segment_lengths(const Matrix& points) {
  if (points.rows() < 2) throw std::invalid_argument("polyline: need at least 2 points");
  std::vector<double> seg(points.rows() - 1);
  for (std::size_t i = 1; i < points.rows(); ++i) seg[i - 1] = distance(points.row(i), points.row(i - 1));
  return seg;
}

inline double polyline_length(const Matrix& points) {
  const auto seg = segment_lengths(points);
  double s = 0.0;
  for (double v : seg) s += v;
  return s;
}

// Population standard deviation of segment lengths divided by their mean.
inline double uniformity_cv(const Matrix& points) {
  const auto seg = segment_lengths(points);
  double mean = 0.0;
  for (double v : seg) mean += v;
  mean /= static_cast<double>(seg.size());
  if (mean <= 0.0) return 0.0;
  double var = 0.0;
  for (double v : seg) var += (v - mean) * (v - mean);
  var /= static_cast<double>(seg.size());
  return std::sqrt(var) / mean;
}

struct TangentialResidual {
  double mean = 0.0;                  // over non-degenerate samples
  std::vector<double> per_sample;     // NaN where excluded
  std::vector<std::size_t> excluded;  // samples with a rank-deficient Jacobian
};

// Fraction of the decoded curve's second derivative lying in the tangent
// space spanned by the decoder Jacobian columns (orthonormalised).
template <LatentDecoder Decoder>
TangentialResidual tangential_residual(const Decoder& decoder, const CubicCurve& curve,
                                       const std::vector<double>& ts, double dt, double eps = 1e-12) {
  const CurveBatch batch = make_curve_batch(decoder, curve, ts, dt);
  const Matrix acc = batch_second_diffs(batch);
  TangentialResidual out;
  out.per_sample.assign(batch.samples(), std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < batch.samples(); ++i) {
    Matrix basis = batch.jacobians[i];
    double largest = 0.0;
    for (std::size_t c = 0; c < basis.cols(); ++c) largest = std::max(largest, norm2(basis.col(c)));
    const std::size_t collapsed = orthonormalize_columns(basis, 1e-10);
    if (largest == 0.0 || collapsed > 0) {
      out.excluded.push_back(i);
      continue;
    }
    const auto a = acc.row(i);
    double proj2 = 0.0;
    for (std::size_t c = 0; c < basis.cols(); ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < basis.rows(); ++r) s += basis(r, c) * a[r];
      proj2 += s * s;
    }
    const double value = std::sqrt(proj2) / (norm2(a) + eps);
    out.per_sample[i] = value;
    sum += value;
    ++used;
  }
  out.mean = used ? sum / static_cast<double>(used) : 0.0;
  return out;
}

// min over affine L of ‖[A 1]·L − B‖_F, divided by ‖B‖_F.
inline Matrix affine_fit(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("procrustes_affine: row mismatch " + a.shape() + " vs " + b.shape());
  if (a.rows() < a.cols() + 1) throw std::invalid_argument("procrustes_affine: need N >= d+1 rows");
  Matrix design(a.rows(), a.cols() + 1);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) design(r, c) = a(r, c);
    design(r, a.cols()) = 1.0;
  }
  return matmul(design, lstsq(design, b));
}

inline double procrustes_affine(const Matrix& a, const Matrix& b) {
  const Matrix fitted = affine_fit(a, b);
  const double nb = frobenius_norm(b);
  return frobenius_norm(fitted - b) / (nb > 0.0 ? nb : 1.0);
}

// Dijkstra over the symmetrised k-NN graph with Euclidean edge weights.
inline double knn_graph_shortest_path(const Matrix& points, std::size_t k, std::size_t from, std::size_t to) {
  const std::size_t n = points.rows();
  if (from >= n || to >= n) throw std::invalid_argument("knn_graph_shortest_path: index out of range");
  if (from == to) return 0.0;
  const auto nbrs = knn(points, k);
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : nbrs[i]) {
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[from] = 0.0;
  heap.emplace(0.0, from);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    if (u == to) return d;
    for (std::size_t v : adj[u]) {
      const double nd = d + distance(points.row(u), points.row(v));
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  throw std::runtime_error("knn_graph_shortest_path: endpoints are disconnected in the k-NN graph");
}

// Mean distance from each query row to its nearest reference row.
inline double mean_nearest_distance(const Matrix& queries, const Matrix& reference) {
  if (queries.cols() != reference.cols()) throw std::invalid_argument("mean_nearest_distance: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < reference.rows(); ++j)
      best = std::min(best, squared_distance(queries.row(i), reference.row(j)));
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(std::max<std::size_t>(queries.rows(), 1));
}

// Median over points of the distance to their nearest other point.
inline double median_nn_distance(const Matrix& points) {
  const auto nbrs = knn(points, 1);
  std::vector<double> d(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) d[i] = distance(points.row(i), points.row(nbrs[i][0]));
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(d.begin(), mid);
  return 0.5 * (lower + upper);
}

struct GeodesicReport {
  double polyline_length = 0.0;
  double chord_length = 0.0;                 // straight-line endpoint distance
  std::optional<double> oracle_length;
  std::optional<double> length_ratio;        // polyline_length / oracle_length
  double uniformity_cv = 0.0;
  double tangential_residual = 0.0;          // orthonormalised-basis diagnostic
  std::size_t tangential_excluded = 0;
  double geodesic_loss = 0.0;                // raw-Jacobian projection norm
  double on_manifold_dist = 0.0;             // mean distance to nearest training point
  std::size_t eval_points = 0;
};

struct EvalConfig {
  std::size_t n_points = 100;  // intervals of the evaluation grid
  double dt = 1e-3;
};

// Metrics for a trained curve; `reference` is the training cloud.
template <LatentDecoder Decoder>
GeodesicReport evaluate_curve(const Decoder& decoder, const CubicCurve& curve, const Matrix& reference,
                              const EvalConfig& cfg, std::optional<double> oracle_length = std::nullopt) {
  const auto ts = uniform_grid(cfg.n_points);
  const CurveBatch batch = make_curve_batch(decoder, curve, ts, cfg.dt);
  GeodesicReport rep;
  rep.eval_points = batch.samples();
  rep.polyline_length = polyline_length(batch.decoded);
  rep.chord_length = distance(batch.decoded.row(0), batch.decoded.row(batch.samples() - 1));
  rep.uniformity_cv = uniformity_cv(batch.decoded);
  const auto tr = tangential_residual(decoder, curve, ts, cfg.dt);
  rep.tangential_residual = tr.mean;
  rep.tangential_excluded = tr.excluded.size();
  rep.geodesic_loss = l_geo(batch);
  rep.on_manifold_dist = mean_nearest_distance(batch.decoded, reference);
  if (oracle_length) {
    rep.oracle_length = *oracle_length;
    if (*oracle_length > 0.0) rep.length_ratio = rep.polyline_length / *oracle_length;
  }
  return rep;
}

// Decoded evaluation grid, for plotting.
template <LatentDecoder Decoder>
Matrix decoded_curve(const Decoder& decoder, const CubicCurve& curve, std::size_t n_points) {
  const auto ts = uniform_grid(n_points);
  Matrix z(ts.size(), curve.dim());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto p = curve_eval(curve, ts[i]);
    std::copy(p.begin(), p.end(), z.row(i).begin());
  }
  return decoder.decode(z);
}

}  // namespace mgeo
