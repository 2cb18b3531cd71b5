#pragma once

#include <cmath>
#include <vector>

#include "mgeo/decoder.hpp"
#include "mgeo/linalg.hpp"
#include "mgeo/nn.hpp"
#include "mgeo/rng.hpp"

namespace mgeo::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

inline Matrix random_symmetric(std::size_t n, SplitMix64& rng) {
  Matrix a = random_matrix(n, n, rng);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i);
  return a;
}

inline Matrix random_psd(std::size_t n, SplitMix64& rng) {
  const Matrix g = random_matrix(n, n, rng);
  return matmul_tn(g, g);
}

inline Matrix random_rotation3(SplitMix64& rng) {
  Matrix q = random_matrix(3, 3, rng);
  orthonormalize_columns(q);
  return q;
}

// Unit circle embedding z -> (cos z, sin z) of a 1-D latent space.
struct CircleDecoder {
  std::size_t latent_dim() const { return 1; }
  std::size_t ambient_dim() const { return 2; }
  Matrix decode(const Matrix& z) const {
    Matrix x(z.rows(), 2);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      x(r, 0) = std::cos(z(r, 0));
      x(r, 1) = std::sin(z(r, 0));
    }
    return x;
  }
  std::vector<Matrix> jacobians(const Matrix& z) const {
    std::vector<Matrix> out;
    for (std::size_t r = 0; r < z.rows(); ++r) out.push_back(Matrix{{-std::sin(z(r, 0))}, {std::cos(z(r, 0))}});
    return out;
  }
  Matrix pullback(const Matrix& z, const Matrix& up) const {
    Matrix g(z.rows(), 1);
    for (std::size_t r = 0; r < z.rows(); ++r)
      g(r, 0) = -std::sin(z(r, 0)) * up(r, 0) + std::cos(z(r, 0)) * up(r, 1);
    return g;
  }
};

static_assert(LatentDecoder<CircleDecoder>);

// Entrywise relative error; the 1e-6 floor keeps near-zero entries, where
// central differences only resolve ~1e-11 absolutely, from dominating.
inline double grad_rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

inline double frob_inner(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

struct GradCheck {
  double param_err = 0.0;
  double input_err = 0.0;
};

// backward() against central differences of L = <upstream, forward(x)>.
inline GradCheck gradient_check(const MlpModel& model, const Matrix& x, const Matrix& upstream,
                                double h = 1e-5) {
  const GradientBundle g = backward(model, x, upstream);
  const auto analytic = g.flatten();
  GradCheck out;
  MlpModel probe = model;
  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    probe.set_parameters(params);
    const double lp = frob_inner(upstream, forward(probe, x));
    params[i] = keep - h;
    probe.set_parameters(params);
    const double lm = frob_inner(upstream, forward(probe, x));
    params[i] = keep;
    out.param_err = std::max(out.param_err, grad_rel_err(analytic[i], (lp - lm) / (2.0 * h)));
  }
  Matrix xp = x;
  for (std::size_t i = 0; i < x.data().size(); ++i) {
    const double keep = xp.data()[i];
    xp.data()[i] = keep + h;
    const double lp = frob_inner(upstream, forward(model, xp));
    xp.data()[i] = keep - h;
    const double lm = frob_inner(upstream, forward(model, xp));
    xp.data()[i] = keep;
    out.input_err = std::max(out.input_err, grad_rel_err(g.input.data()[i], (lp - lm) / (2.0 * h)));
  }
  return out;
}

// Random architecture with 1-3 layers and widths up to 16.
inline MlpModel random_mlp(SplitMix64& rng, Activation act) {
  const std::size_t layers = 1 + rng.below(3);
  std::vector<std::size_t> sizes;
  for (std::size_t l = 0; l <= layers; ++l) sizes.push_back(1 + rng.below(16));
  MlpModel m = MlpModel::glorot(sizes, act, rng.next());
  for (std::size_t l = 0; l < m.num_layers(); ++l)
    for (double& b : m.layer(l).bias) b = rng.uniform(-0.5, 0.5);
  return m;
}


// Constant map to a fixed ambient point.
struct ConstantDecoder {
  std::size_t latent = 2;
  std::vector<double> value{1.0, -2.0, 0.5};
  std::size_t latent_dim() const { return latent; }
  std::size_t ambient_dim() const { return value.size(); }
  Matrix decode(const Matrix& z) const {
    Matrix x(z.rows(), value.size());
    for (std::size_t r = 0; r < z.rows(); ++r) std::copy(value.begin(), value.end(), x.row(r).begin());
    return x;
  }
  std::vector<Matrix> jacobians(const Matrix& z) const {
    return std::vector<Matrix>(z.rows(), Matrix(value.size(), latent));
  }
  Matrix pullback(const Matrix& z, const Matrix&) const { return Matrix(z.rows(), latent); }
};

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

}  // namespace mgeo::testing
