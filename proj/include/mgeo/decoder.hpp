#pragma once

// Latent-to-ambient maps consumed by the curve losses. Anything providing
// batched evaluation, per-point Jacobians and a vector-Jacobian product
// qualifies; MlpDecoder adapts a trained network.

#include <concepts>
#include <cstddef>
#include <vector>

#include "mgeo/linalg.hpp"
#include "mgeo/nn.hpp"

namespace mgeo {

template <class D>
concept LatentDecoder = requires(const D& dec, const Matrix& z, const Matrix& upstream) {
  { dec.latent_dim() } -> std::convertible_to<std::size_t>;
  { dec.ambient_dim() } -> std::convertible_to<std::size_t>;
  // Rows of z are latent points; result rows are decoded points.
  { dec.decode(z) } -> std::same_as<Matrix>;
  // One ambient_dim x latent_dim Jacobian per row of z.
  { dec.jacobians(z) } -> std::same_as<std::vector<Matrix>>;
  // Row r of the result is upstream.row(r)ᵀ · J(z.row(r)).
  { dec.pullback(z, upstream) } -> std::same_as<Matrix>;
};

class MlpDecoder {
public:
  explicit MlpDecoder(const MlpModel& model) : model_(&model) {}

  std::size_t latent_dim() const { return model_->input_dim(); }
  std::size_t ambient_dim() const { return model_->output_dim(); }
  Matrix decode(const Matrix& z) const { return forward(*model_, z); }
  std::vector<Matrix> jacobians(const Matrix& z) const { return input_jacobians(*model_, z); }
  Matrix pullback(const Matrix& z, const Matrix& upstream) const {
    return input_gradient(*model_, z, upstream);
  }
  const MlpModel& model() const { return *model_; }

private:
  const MlpModel* model_;
};

// x = W·z + offset, W is ambient x latent.
class AffineDecoder {
public:
  AffineDecoder(Matrix w, std::vector<double> offset) : w_(std::move(w)), offset_(std::move(offset)) {
    if (offset_.size() != w_.rows()) throw std::invalid_argument("AffineDecoder: offset size mismatch");
  }
  explicit AffineDecoder(Matrix w) : AffineDecoder(w, std::vector<double>(w.rows(), 0.0)) {}

  static AffineDecoder identity(std::size_t d) { return AffineDecoder(Matrix::identity(d)); }

  std::size_t latent_dim() const { return w_.cols(); }
  std::size_t ambient_dim() const { return w_.rows(); }
  Matrix decode(const Matrix& z) const {
    Matrix x = matmul_nt(z, w_);
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) x(r, c) += offset_[c];
    return x;
  }
  std::vector<Matrix> jacobians(const Matrix& z) const { return std::vector<Matrix>(z.rows(), w_); }
  Matrix pullback(const Matrix&, const Matrix& upstream) const { return matmul(upstream, w_); }

private:
  Matrix w_;
  std::vector<double> offset_;
};

static_assert(LatentDecoder<MlpDecoder>);
static_assert(LatentDecoder<AffineDecoder>);

}  // namespace mgeo
