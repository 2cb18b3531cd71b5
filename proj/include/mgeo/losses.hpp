#pragma once

// Geodesic training losses on the decoded curve G(t) = D(c(t)).
//
// All t-derivatives are central differences with step Δt, so each loss is an
// explicit function of decoder evaluations at the stencil points
// t_i − Δt, t_i, t_i + Δt. The cubic is evaluated outside [0, 1] where a
// stencil crosses an endpoint.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgeo/curve.hpp"
#include "mgeo/decoder.hpp"
#include "mgeo/linalg.hpp"
#include "mgeo/rng.hpp"

namespace mgeo {

struct LossWeights {
  double conspeed = 1.0;  // λ1
  double geo = 0.1;       // λ2
  double min = 1.0;       // λ3

  void validate() const {
    if (conspeed < 0.0 || geo < 0.0 || min < 0.0) {
      throw std::invalid_argument("loss weights must be nonnegative");
    }
    if (conspeed == 0.0 && geo == 0.0 && min == 0.0) throw std::invalid_argument("weights all zero");
  }
};

struct LossBreakdown {
  double conspeed = 0.0;
  double geo = 0.0;
  double min = 0.0;
  double total = 0.0;
};

// Sample parameters 0 = t_0 < … < t_n = 1 on a uniform grid.
inline std::vector<double> uniform_grid(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_grid: need n >= 1 intervals");
  std::vector<double> ts(n + 1);
  for (std::size_t i = 0; i <= n; ++i) ts[i] = static_cast<double>(i) / static_cast<double>(n);
  return ts;
}

// Endpoints pinned, interior points uniform at random and sorted. Draws are
// repeated until every gap is at least min_gap.
inline std::vector<double> random_grid(std::size_t n, SplitMix64& rng, double min_gap = 0.0) {
  if (n == 0) throw std::invalid_argument("random_grid: need n >= 1 intervals");
  if (min_gap * static_cast<double>(n) >= 1.0) {
    throw std::invalid_argument("random_grid: min_gap too large for n intervals");
  }
  std::vector<double> ts(n + 1);
  ts.front() = 0.0;
  ts.back() = 1.0;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    for (std::size_t i = 1; i < n; ++i) ts[i] = rng.uniform();
    std::sort(ts.begin() + 1, ts.end() - 1);
    bool ok = true;
    for (std::size_t i = 1; i <= n && ok; ++i) ok = ts[i] - ts[i - 1] >= min_gap;
    if (ok) return ts;
  }
  throw std::runtime_error("random_grid: could not satisfy the minimum gap");
}

struct CurveBatch {
  std::vector<double> ts;
  double dt = 1e-3;
  Matrix latent;                 // c(t_i), (n+1) x d
  Matrix decoded;                // G(t_i), (n+1) x D
  Matrix decoded_minus;          // G(t_i − Δt)
  Matrix decoded_plus;           // G(t_i + Δt)
  std::vector<double> speeds;    // ‖(G(t_i+Δt) − G(t_i−Δt)) / 2Δt‖
  std::vector<Matrix> jacobians; // J_D(c(t_i)), D x d

  std::size_t samples() const { return ts.size(); }
};

namespace detail {

inline void validate_grid(const std::vector<double>& ts, double dt) {
  if (ts.size() < 2) throw std::invalid_argument("curve batch: need at least two samples");
  if (!(dt > 0.0)) throw std::invalid_argument("curve batch: dt must be > 0");
  if (ts.front() != 0.0 || ts.back() != 1.0) {
    throw std::invalid_argument("curve batch: samples must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double gap = ts[i] - ts[i - 1];
    if (!(gap > 0.0)) throw std::invalid_argument("curve batch: samples must be strictly increasing");
    if (dt > 0.5 * gap) {
      throw std::invalid_argument("curve batch: dt exceeds half the minimum sample spacing");
    }
  }
}

// Latent stencil points, laid out as three blocks of n+1 rows:
// [t_i − Δt | t_i | t_i + Δt].
inline Matrix stencil_points(const CubicCurve& curve, const std::vector<double>& ts, double dt) {
  const std::size_t m = ts.size();
  Matrix z(3 * m, curve.dim());
  for (std::size_t i = 0; i < m; ++i) {
    const double offsets[3] = {-dt, 0.0, dt};
    for (std::size_t s = 0; s < 3; ++s) {
      const auto p = curve_eval(curve, ts[i] + offsets[s]);
      std::copy(p.begin(), p.end(), z.row(s * m + i).begin());
    }
  }
  return z;
}

inline Matrix block_rows(const Matrix& x, std::size_t first, std::size_t count) {
  Matrix out(count, x.cols());
  std::copy(x.row(first).begin(), x.row(first).begin() + static_cast<std::ptrdiff_t>(count * x.cols()),
            out.data().begin());
  return out;
}

}  // namespace detail

// Evaluates the decoder at every stencil point. When `frozen_jacobians` is
// given those Jacobians are used for the geodesic term instead of fresh ones.
template <LatentDecoder Decoder>
CurveBatch make_curve_batch(const Decoder& decoder, const CubicCurve& curve,
                            const std::vector<double>& ts, double dt,
                            const std::vector<Matrix>* frozen_jacobians = nullptr) {
  detail::validate_grid(ts, dt);
  if (curve.dim() != decoder.latent_dim()) {
    throw std::invalid_argument("curve batch: curve dimension " + std::to_string(curve.dim()) +
                                " does not match decoder latent dimension " +
                                std::to_string(decoder.latent_dim()));
  }
  const std::size_t m = ts.size();
  const Matrix z = detail::stencil_points(curve, ts, dt);
  const Matrix g = decoder.decode(z);
  CurveBatch batch;
  batch.ts = ts;
  batch.dt = dt;
  batch.decoded_minus = detail::block_rows(g, 0, m);
  batch.decoded = detail::block_rows(g, m, m);
  batch.decoded_plus = detail::block_rows(g, 2 * m, m);
  batch.latent = detail::block_rows(z, m, m);
  batch.speeds.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    batch.speeds[i] = distance(batch.decoded_plus.row(i), batch.decoded_minus.row(i)) / (2.0 * dt);
  }
  if (frozen_jacobians) {
    if (frozen_jacobians->size() != m) throw std::invalid_argument("curve batch: frozen Jacobian count mismatch");
    batch.jacobians = *frozen_jacobians;
  } else {
    batch.jacobians = decoder.jacobians(batch.latent);
  }
  return batch;
}

template <LatentDecoder Decoder>
Matrix decode_point(const Decoder& decoder, std::span<const double> z) {
  return decoder.decode(Matrix::row_vector(z));
}

template <LatentDecoder Decoder>
double speed_norm(const Decoder& decoder, const CubicCurve& curve, double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("speed_norm: dt must be > 0");
  const Matrix plus = decode_point(decoder, curve_eval(curve, t + dt));
  const Matrix minus = decode_point(decoder, curve_eval(curve, t - dt));
  return distance(plus.row(0), minus.row(0)) / (2.0 * dt);
}

template <LatentDecoder Decoder>
std::vector<double> second_diff(const Decoder& decoder, const CubicCurve& curve, double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("second_diff: dt must be > 0");
  const Matrix plus = decode_point(decoder, curve_eval(curve, t + dt));
  const Matrix mid = decode_point(decoder, curve_eval(curve, t));
  const Matrix minus = decode_point(decoder, curve_eval(curve, t - dt));
  std::vector<double> out(plus.cols());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (plus(0, i) + minus(0, i) - 2.0 * mid(0, i)) / (dt * dt);
  return out;
}

// ‖s / mean(s) − 1‖ over the sampled speed norms s.
inline double l_conspeed(std::span<const double> speeds) {
  if (speeds.empty()) throw std::invalid_argument("l_conspeed: no speeds");
  double mean = 0.0;
  for (double s : speeds) mean += s;
  mean /= static_cast<double>(speeds.size());
  if (mean < 1e-12) throw std::runtime_error("l_conspeed: degenerate curve (mean speed ~ 0)");
  double acc = 0.0;
  for (double s : speeds) {
    const double r = s / mean - 1.0;
    acc += r * r;
  }
  return std::sqrt(acc);
}

inline double l_conspeed(const CurveBatch& batch) { return l_conspeed(batch.speeds); }

inline Matrix batch_second_diffs(const CurveBatch& batch) {
  Matrix acc(batch.samples(), batch.decoded.cols());
  const double inv = 1.0 / (batch.dt * batch.dt);
  for (std::size_t i = 0; i < acc.rows(); ++i)
    for (std::size_t c = 0; c < acc.cols(); ++c)
      acc(i, c) = (batch.decoded_plus(i, c) + batch.decoded_minus(i, c) - 2.0 * batch.decoded(i, c)) * inv;
  return acc;
}

// Rows ω_i = (d²G/dt² at t_i)ᵀ · J_D(c(t_i)).
inline Matrix tangential_projections(const CurveBatch& batch) {
  const Matrix acc = batch_second_diffs(batch);
  const std::size_t d = batch.jacobians.empty() ? 0 : batch.jacobians.front().cols();
  Matrix omega(batch.samples(), d);
  for (std::size_t i = 0; i < batch.samples(); ++i) {
    const Matrix& j = batch.jacobians[i];
    for (std::size_t k = 0; k < d; ++k) {
      double s = 0.0;
      for (std::size_t r = 0; r < j.rows(); ++r) s += acc(i, r) * j(r, k);
      omega(i, k) = s;
    }
  }
  return omega;
}

inline double l_geo(const CurveBatch& batch) { return frobenius_norm(tangential_projections(batch)); }

inline double l_min(const CurveBatch& batch) {
  double len = 0.0;
  for (std::size_t i = 1; i < batch.samples(); ++i)
    len += distance(batch.decoded.row(i), batch.decoded.row(i - 1));
  return len;
}

inline LossBreakdown total_loss(const CurveBatch& batch, const LossWeights& w) {
  w.validate();
  LossBreakdown out;
  double mean = 0.0;
  for (double s : batch.speeds) mean += s;
  mean /= static_cast<double>(batch.speeds.size());
  if (mean >= 1e-12) out.conspeed = l_conspeed(batch);
  else if (w.conspeed > 0.0) throw std::runtime_error("l_conspeed: degenerate curve (mean speed ~ 0)");
  out.geo = l_geo(batch);
  out.min = l_min(batch);
  out.total = w.conspeed * out.conspeed + w.geo * out.geo + w.min * out.min;
  return out;
}

template <LatentDecoder Decoder>
LossBreakdown total_loss(const Decoder& decoder, const CubicCurve& curve,
                         const std::vector<double>& ts, double dt, const LossWeights& w) {
  return total_loss(make_curve_batch(decoder, curve, ts, dt), w);
}

struct LossGradient {
  LossBreakdown loss;
  std::vector<double> grad;        // d total / d [a..., b...]
  std::vector<Matrix> jacobians;   // the Jacobians held fixed for the geodesic term
};

// Gradient of the total loss with respect to the free curve coefficients.
// The Jacobian factor of the geodesic term is treated as a constant, i.e.
// this is the exact gradient of the objective with those Jacobians frozen at
// their current values.
template <LatentDecoder Decoder>
LossGradient total_loss_grad(const Decoder& decoder, const CubicCurve& curve,
                             const std::vector<double>& ts, double dt, const LossWeights& w,
                             const std::vector<Matrix>* frozen_jacobians = nullptr) {
  const CurveBatch batch = make_curve_batch(decoder, curve, ts, dt, frozen_jacobians);
  LossGradient out;
  out.loss = total_loss(batch, w);

  const std::size_t m = batch.samples();
  const std::size_t amb = batch.decoded.cols();
  // Upstream gradient for the three stencil blocks, same layout as stencil_points.
  Matrix up(3 * m, amb);
  auto minus = [&](std::size_t i) { return up.row(i); };
  auto mid = [&](std::size_t i) { return up.row(m + i); };
  auto plus = [&](std::size_t i) { return up.row(2 * m + i); };

  if (w.conspeed > 0.0 && out.loss.conspeed > 0.0) {
    double mean = 0.0;
    for (double s : batch.speeds) mean += s;
    mean /= static_cast<double>(m);
    const double l = out.loss.conspeed;
    double rs = 0.0;
    for (double s : batch.speeds) rs += (s / mean - 1.0) * s;
    for (std::size_t i = 0; i < m; ++i) {
      const double s = batch.speeds[i];
      if (s <= 0.0) continue;
      const double r = s / mean - 1.0;
      const double gs = w.conspeed * (r / (l * mean) - rs / (l * mean * mean * static_cast<double>(m)));
      const double coef = gs / (s * 2.0 * dt * 2.0 * dt);  // (v/‖v‖)/(2Δt), v = ΔG/(2Δt)
      for (std::size_t c = 0; c < amb; ++c) {
        const double diff = batch.decoded_plus(i, c) - batch.decoded_minus(i, c);
        plus(i)[c] += coef * diff;
        minus(i)[c] -= coef * diff;
      }
    }
  }

  if (w.geo > 0.0 && out.loss.geo > 0.0) {
    const Matrix omega = tangential_projections(batch);
    const double scale = w.geo / (out.loss.geo * dt * dt);
    for (std::size_t i = 0; i < m; ++i) {
      const Matrix& j = batch.jacobians[i];
      for (std::size_t r = 0; r < amb; ++r) {
        double ga = 0.0;
        for (std::size_t k = 0; k < j.cols(); ++k) ga += j(r, k) * omega(i, k);
        ga *= scale;
        plus(i)[r] += ga;
        minus(i)[r] += ga;
        mid(i)[r] -= 2.0 * ga;
      }
    }
  }

  if (w.min > 0.0) {
    for (std::size_t i = 1; i < m; ++i) {
      const double len = distance(batch.decoded.row(i), batch.decoded.row(i - 1));
      if (len <= 0.0) continue;
      for (std::size_t c = 0; c < amb; ++c) {
        const double u = w.min * (batch.decoded(i, c) - batch.decoded(i - 1, c)) / len;
        mid(i)[c] += u;
        mid(i - 1)[c] -= u;
      }
    }
  }

  const Matrix z = detail::stencil_points(curve, ts, dt);
  const Matrix dz = decoder.pullback(z, up);
  const std::size_t d = curve.dim();
  out.grad.assign(2 * d, 0.0);
  const double offsets[3] = {-dt, 0.0, dt};
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t i = 0; i < m; ++i) {
      const double t = ts[i] + offsets[s];
      const double wa = curve_weight_a(t);
      const double wb = curve_weight_b(t);
      for (std::size_t k = 0; k < d; ++k) {
        out.grad[k] += wa * dz(s * m + i, k);
        out.grad[d + k] += wb * dz(s * m + i, k);
      }
    }
  }
  for (double g : out.grad)
    if (!std::isfinite(g)) throw std::runtime_error("total_loss_grad: non-finite gradient");
  out.jacobians = batch.jacobians;
  return out;
}

}  // namespace mgeo
