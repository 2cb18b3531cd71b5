#pragma once

// A small multilayer perceptron with exact reverse-mode gradients.
//
// Layer l maps a row batch X (B x in) to X·Wᵀ + b with W stored out x in.
// Hidden layers apply the activation elementwise; the output layer is linear.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgeo/linalg.hpp"
#include "mgeo/rng.hpp"

namespace mgeo {

enum class Activation { tanh, softplus };

inline std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "softplus"; }

inline Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "softplus") return Activation::softplus;
  throw std::invalid_argument("unknown activation '" + s + "' (expected tanh or softplus)");
}

struct DenseLayer {
  Matrix weight;              // out x in
  std::vector<double> bias;   // out
};

class MlpModel {
public:
  MlpModel() = default;

  // Zero-initialised network with the given layer widths (input first).
  MlpModel(std::vector<std::size_t> layer_sizes, Activation activation)
      : sizes_(std::move(layer_sizes)), activation_(activation) {
    if (sizes_.size() < 2) throw std::invalid_argument("MlpModel: need at least two layer sizes");
    for (std::size_t s : sizes_)
      if (s == 0) throw std::invalid_argument("MlpModel: zero-width layer");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      layers_.push_back({Matrix(sizes_[l + 1], sizes_[l]), std::vector<double>(sizes_[l + 1], 0.0)});
    }
  }

  // Glorot-uniform weights, zero biases.
  static MlpModel glorot(std::vector<std::size_t> layer_sizes, Activation activation,
                         std::uint64_t seed) {
    MlpModel m(std::move(layer_sizes), activation);
    SplitMix64 rng(seed);
    for (auto& layer : m.layers_) {
      const double fan = static_cast<double>(layer.weight.rows() + layer.weight.cols());
      const double limit = std::sqrt(6.0 / fan);
      for (double& w : layer.weight.data()) w = rng.uniform(-limit, limit);
    }
    return m;
  }

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  std::size_t num_layers() const { return layers_.size(); }

  DenseLayer& layer(std::size_t l) { return layers_[l]; }
  const DenseLayer& layer(std::size_t l) const { return layers_[l]; }

  std::size_t num_parameters() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
  }

  // Parameters flattened layer by layer: weights (row-major) then biases.
  std::vector<double> parameters() const {
    std::vector<double> p;
    p.reserve(num_parameters());
    for (const auto& l : layers_) {
      p.insert(p.end(), l.weight.data().begin(), l.weight.data().end());
      p.insert(p.end(), l.bias.begin(), l.bias.end());
    }
    return p;
  }

  void set_parameters(std::span<const double> p) {
    if (p.size() != num_parameters()) {
      throw std::invalid_argument("set_parameters: expected " + std::to_string(num_parameters()) +
                                  " values, got " + std::to_string(p.size()));
    }
    std::size_t off = 0;
    for (auto& l : layers_) {
      std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(off), l.weight.size(), l.weight.data().begin());
      off += l.weight.size();
      std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(off), l.bias.size(), l.bias.begin());
      off += l.bias.size();
    }
  }

  bool all_finite() const {
    for (const auto& l : layers_) {
      if (!l.weight.all_finite()) return false;
      for (double b : l.bias)
        if (!std::isfinite(b)) return false;
    }
    return true;
  }

  bool operator==(const MlpModel& o) const {
    if (sizes_ != o.sizes_ || activation_ != o.activation_) return false;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      if (!(layers_[l].weight == o.layers_[l].weight) || layers_[l].bias != o.layers_[l].bias)
        return false;
    }
    return true;
  }

private:
  std::vector<std::size_t> sizes_;
  Activation activation_ = Activation::tanh;
  std::vector<DenseLayer> layers_;
};

struct GradientBundle {
  std::vector<Matrix> weights;               // mirrors layer weights
  std::vector<std::vector<double>> biases;   // mirrors layer biases
  Matrix input;                              // dL/dx, same shape as x

  std::vector<double> flatten() const {
    std::vector<double> g;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      g.insert(g.end(), weights[l].data().begin(), weights[l].data().end());
      g.insert(g.end(), biases[l].begin(), biases[l].end());
    }
    return g;
  }
};

namespace detail {

inline double activate(Activation a, double z) {
  if (a == Activation::tanh) return std::tanh(z);
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Derivative expressed through the pre-activation z.
inline double activate_grad(Activation a, double z) {
  if (a == Activation::tanh) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  }
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// Pre-activations of every layer and the post-activation inputs to each.
struct ForwardCache {
  std::vector<Matrix> inputs;  // inputs[l] feeds layer l; inputs[0] = x
  std::vector<Matrix> pre;     // pre[l] = inputs[l]·Wᵀ + b
};

inline void check_input(const MlpModel& model, const Matrix& x, const char* what) {
  if (x.cols() != model.input_dim()) {
    throw std::invalid_argument(std::string(what) + ": input has " + std::to_string(x.cols()) +
                                " columns, model expects " + std::to_string(model.input_dim()));
  }
}

inline Matrix affine(const DenseLayer& layer, const Matrix& x) {
  Matrix out = matmul_nt(x, layer.weight);
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += layer.bias[c];
  return out;
}

inline ForwardCache forward_cached(const MlpModel& model, const Matrix& x) {
  ForwardCache cache;
  cache.inputs.push_back(x);
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    Matrix z = affine(model.layer(l), cache.inputs.back());
    if (l + 1 < model.num_layers()) {
      Matrix a = z;
      for (double& v : a.data()) v = activate(model.activation(), v);
      cache.pre.push_back(std::move(z));
      cache.inputs.push_back(std::move(a));
    } else {
      cache.pre.push_back(std::move(z));
    }
  }
  return cache;
}

inline GradientBundle backward_cached(const MlpModel& model, const ForwardCache& cache,
                                      Matrix upstream, bool parameter_grads) {
  const std::size_t nl = model.num_layers();
  GradientBundle g;
  if (parameter_grads) {
    g.weights.resize(nl);
    g.biases.resize(nl);
  }
  Matrix delta = std::move(upstream);
  for (std::size_t l = nl; l-- > 0;) {
    if (l + 1 < nl) {
      const Matrix& z = cache.pre[l];
      for (std::size_t i = 0; i < delta.size(); ++i)
        delta.data()[i] *= activate_grad(model.activation(), z.data()[i]);
    }
    if (parameter_grads) {
      g.weights[l] = matmul_tn(delta, cache.inputs[l]);
      g.biases[l].assign(delta.cols(), 0.0);
      for (std::size_t r = 0; r < delta.rows(); ++r)
        for (std::size_t c = 0; c < delta.cols(); ++c) g.biases[l][c] += delta(r, c);
    }
    delta = matmul(delta, model.layer(l).weight);
  }
  g.input = std::move(delta);
  return g;
}

}  // namespace detail

inline Matrix forward(const MlpModel& model, const Matrix& x) {
  detail::check_input(model, x, "forward");
  Matrix a = x;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    a = detail::affine(model.layer(l), a);
    if (l + 1 < model.num_layers())
      for (double& v : a.data()) v = detail::activate(model.activation(), v);
  }
  return a;
}

inline std::vector<double> forward(const MlpModel& model, std::span<const double> x) {
  return forward(model, Matrix::row_vector(x)).data();
}

// Gradients of ⟨upstream, forward(x)⟩ with respect to parameters and x.
inline GradientBundle backward(const MlpModel& model, const Matrix& x, const Matrix& upstream) {
  detail::check_input(model, x, "backward");
  if (upstream.rows() != x.rows() || upstream.cols() != model.output_dim()) {
    throw std::invalid_argument("backward: upstream shape " + upstream.shape() +
                                " does not match output shape " + std::to_string(x.rows()) + "x" +
                                std::to_string(model.output_dim()));
  }
  return detail::backward_cached(model, detail::forward_cached(model, x), upstream, true);
}

// Gradient of ⟨upstream, forward(x)⟩ with respect to x only.
inline Matrix input_gradient(const MlpModel& model, const Matrix& x, const Matrix& upstream) {
  detail::check_input(model, x, "input_gradient");
  if (upstream.rows() != x.rows() || upstream.cols() != model.output_dim()) {
    throw std::invalid_argument("input_gradient: upstream shape " + upstream.shape() +
                                " does not match output shape");
  }
  return detail::backward_cached(model, detail::forward_cached(model, x), upstream, false).input;
}

// Jacobians ∂out_i/∂in_j at every row of z, one reverse sweep per output
// coordinate. Result k is output_dim x input_dim.
inline std::vector<Matrix> input_jacobians(const MlpModel& model, const Matrix& z) {
  detail::check_input(model, z, "input_jacobian");
  const std::size_t out = model.output_dim();
  const std::size_t in = model.input_dim();
  Matrix rep(z.rows() * out, in);
  Matrix onehot(z.rows() * out, out);
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t i = 0; i < out; ++i) {
      std::copy(z.row(r).begin(), z.row(r).end(), rep.row(r * out + i).begin());
      onehot(r * out + i, i) = 1.0;
    }
  const Matrix grads =
      detail::backward_cached(model, detail::forward_cached(model, rep), onehot, false).input;
  std::vector<Matrix> jac(z.rows(), Matrix(out, in));
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t i = 0; i < out; ++i)
      for (std::size_t j = 0; j < in; ++j) jac[r](i, j) = grads(r * out + i, j);
  return jac;
}

inline Matrix input_jacobian(const MlpModel& model, std::span<const double> z) {
  if (z.size() != model.input_dim()) {
    throw std::invalid_argument("input_jacobian: point has " + std::to_string(z.size()) +
                                " coordinates, model expects " + std::to_string(model.input_dim()));
  }
  return input_jacobians(model, Matrix::row_vector(z)).front();
}

// ---------------------------------------------------------------------------
// Adaptive-moment optimizer

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Optimizer state for a flat parameter vector.
class Adam {
public:
  Adam() = default;
  explicit Adam(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  std::size_t steps() const { return t_; }
  std::size_t size() const { return m_.size(); }

  void step(std::span<double> params, std::span<const double> grads, const AdamConfig& cfg) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
      throw std::invalid_argument("adam_step: state has " + std::to_string(m_.size()) +
                                  " slots, got " + std::to_string(params.size()) +
                                  " parameters and " + std::to_string(grads.size()) + " gradients");
    }
    for (double g : grads)
      if (!std::isfinite(g)) throw std::runtime_error("adam_step: non-finite gradient");
    ++t_;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = cfg.beta1 * m_[i] + (1.0 - cfg.beta1) * grads[i];
      v_[i] = cfg.beta2 * v_[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
      const double mhat = m_[i] / c1;
      const double vhat = v_[i] / c2;
      params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }

private:
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

inline void adam_step(MlpModel& model, const GradientBundle& grads, Adam& state,
                      const AdamConfig& cfg) {
  auto params = model.parameters();
  const auto g = grads.flatten();
  state.step(params, g, cfg);
  model.set_parameters(params);
  if (!model.all_finite()) throw std::runtime_error("adam_step: parameters became non-finite");
}

// ---------------------------------------------------------------------------
// Checkpoints

inline nlohmann::json to_json(const MlpModel& model) {
  nlohmann::json j;
  j["format"] = "mgeo-mlp";
  j["version"] = 1;
  j["layer_sizes"] = model.layer_sizes();
  j["activation"] = to_string(model.activation());
  auto& layers = j["layers"] = nlohmann::json::array();
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    layers.push_back({{"weight", model.layer(l).weight.data()}, {"bias", model.layer(l).bias}});
  }
  return j;
}

inline MlpModel mlp_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "mgeo-mlp") throw std::runtime_error("checkpoint: not an mgeo-mlp");
  if (j.value("version", 0) != 1) throw std::runtime_error("checkpoint: unsupported version");
  MlpModel m(j.at("layer_sizes").get<std::vector<std::size_t>>(),
             activation_from_string(j.at("activation").get<std::string>()));
  const auto& layers = j.at("layers");
  if (layers.size() != m.num_layers()) throw std::runtime_error("checkpoint: layer count mismatch");
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    auto w = layers[l].at("weight").get<std::vector<double>>();
    auto b = layers[l].at("bias").get<std::vector<double>>();
    auto& layer = m.layer(l);
    if (w.size() != layer.weight.size() || b.size() != layer.bias.size()) {
      throw std::runtime_error("checkpoint: parameter shape mismatch in layer " + std::to_string(l));
    }
    layer.weight = Matrix(layer.weight.rows(), layer.weight.cols(), std::move(w));
    layer.bias = std::move(b);
  }
  return m;
}

}  // namespace mgeo
