#pragma once

// Geometry-regularised autoencoder.
//
// Loss over a batch x with prior chart coordinates m = ML(x):
//
//   w_rec·‖D(E(x)) − x‖ + w_lat·‖E(x) − m‖ + w_dec·‖D(m) − x‖
//
// with Frobenius norms over the batch, squared by default.

#include <cmath>
#include <numbers>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgeo/datasets.hpp"
#include "mgeo/linalg.hpp"
#include "mgeo/ltsa.hpp"
#include "mgeo/nn.hpp"
#include "mgeo/rng.hpp"

namespace mgeo {

struct AeTrainConfig {
  std::size_t latent_dim = 2;
  std::vector<std::size_t> hidden = {64, 64};
  Activation activation = Activation::tanh;
  std::size_t epochs = 400;
  std::size_t batch_size = 64;
  double lr = 3e-3;
  double lr_final = 1e-4;  // cosine-annealed from lr to lr_final over the epochs
  double w_rec = 1.0;
  double w_lat = 1.0;
  double w_dec = 1.0;
  bool squared = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (latent_dim == 0) throw std::invalid_argument("ae: latent_dim must be >= 1");
    if (batch_size == 0) throw std::invalid_argument("ae: batch_size must be >= 1");
    if (w_rec < 0 || w_lat < 0 || w_dec < 0) throw std::invalid_argument("ae: weights must be >= 0");
    if (w_rec == 0 && w_lat == 0 && w_dec == 0) throw std::invalid_argument("ae: weights all zero");
    if (!(lr > 0.0) || !(lr_final > 0.0)) throw std::invalid_argument("ae: learning rates must be > 0");
  }
};

struct AeModel {
  MlpModel encoder;  // ambient -> latent
  MlpModel decoder;  // latent -> ambient

  std::size_t latent_dim() const { return encoder.output_dim(); }
  std::size_t ambient_dim() const { return encoder.input_dim(); }
  bool operator==(const AeModel&) const = default;
};

struct AeLossBreakdown {
  double rec = 0.0;  // ‖D(E(x)) − x‖
  double lat = 0.0;  // ‖E(x) − ML(x)‖
  double dec = 0.0;  // ‖D(ML(x)) − x‖
  double total = 0.0;
};

inline AeModel make_ae(std::size_t ambient_dim, const AeTrainConfig& cfg) {
  std::vector<std::size_t> enc{ambient_dim};
  enc.insert(enc.end(), cfg.hidden.begin(), cfg.hidden.end());
  enc.push_back(cfg.latent_dim);
  std::vector<std::size_t> dec{cfg.latent_dim};
  dec.insert(dec.end(), cfg.hidden.rbegin(), cfg.hidden.rend());
  dec.push_back(ambient_dim);
  return {MlpModel::glorot(enc, cfg.activation, derive_seed(cfg.seed, 1)),
          MlpModel::glorot(dec, cfg.activation, derive_seed(cfg.seed, 2))};
}

inline Matrix encode(const AeModel& m, const Matrix& x) { return forward(m.encoder, x); }
inline Matrix decode(const AeModel& m, const Matrix& z) { return forward(m.decoder, z); }

namespace detail {

inline void check_ae_batch(const AeModel& model, const Matrix& x, const Matrix& ml) {
  if (x.rows() != ml.rows()) {
    throw std::invalid_argument("ae_loss: batch has " + std::to_string(x.rows()) +
                                " rows but ML(x) has " + std::to_string(ml.rows()));
  }
  if (x.cols() != model.ambient_dim() || ml.cols() != model.latent_dim()) {
    throw std::invalid_argument("ae_loss: batch shapes " + x.shape() + " / " + ml.shape() +
                                " do not match the model");
  }
}

inline double term_value(double frob, bool squared) { return squared ? frob * frob : frob; }

// Scale factor turning a residual into its term gradient.
inline double term_grad_scale(double frob, bool squared) {
  if (squared) return 2.0;
  return frob > 0.0 ? 1.0 / frob : 0.0;
}

}  // namespace detail

inline AeLossBreakdown ae_loss(const AeModel& model, const Matrix& x, const Matrix& ml,
                               const AeTrainConfig& cfg) {
  detail::check_ae_batch(model, x, ml);
  const Matrix z = encode(model, x);
  AeLossBreakdown out;
  out.rec = detail::term_value(frobenius_norm(decode(model, z) - x), cfg.squared);
  out.lat = detail::term_value(frobenius_norm(z - ml), cfg.squared);
  out.dec = detail::term_value(frobenius_norm(decode(model, ml) - x), cfg.squared);
  out.total = cfg.w_rec * out.rec + cfg.w_lat * out.lat + cfg.w_dec * out.dec;
  return out;
}

struct AeGradients {
  AeLossBreakdown loss;
  GradientBundle encoder;
  GradientBundle decoder;
};

inline AeGradients ae_loss_grad(const AeModel& model, const Matrix& x, const Matrix& ml,
                                const AeTrainConfig& cfg) {
  detail::check_ae_batch(model, x, ml);
  const auto enc_cache = detail::forward_cached(model.encoder, x);
  const Matrix& z = enc_cache.pre.back();
  const auto rec_cache = detail::forward_cached(model.decoder, z);
  const auto dec_cache = detail::forward_cached(model.decoder, ml);

  Matrix r_rec = rec_cache.pre.back() - x;
  Matrix r_lat = z - ml;
  Matrix r_dec = dec_cache.pre.back() - x;
  const double n_rec = frobenius_norm(r_rec);
  const double n_lat = frobenius_norm(r_lat);
  const double n_dec = frobenius_norm(r_dec);

  AeGradients g;
  g.loss.rec = detail::term_value(n_rec, cfg.squared);
  g.loss.lat = detail::term_value(n_lat, cfg.squared);
  g.loss.dec = detail::term_value(n_dec, cfg.squared);
  g.loss.total = cfg.w_rec * g.loss.rec + cfg.w_lat * g.loss.lat + cfg.w_dec * g.loss.dec;

  r_rec *= cfg.w_rec * detail::term_grad_scale(n_rec, cfg.squared);
  r_lat *= cfg.w_lat * detail::term_grad_scale(n_lat, cfg.squared);
  r_dec *= cfg.w_dec * detail::term_grad_scale(n_dec, cfg.squared);

  GradientBundle via_rec = detail::backward_cached(model.decoder, rec_cache, std::move(r_rec), true);
  const GradientBundle via_dec = detail::backward_cached(model.decoder, dec_cache, std::move(r_dec), true);
  g.decoder = via_rec;
  for (std::size_t l = 0; l < g.decoder.weights.size(); ++l) {
    g.decoder.weights[l] += via_dec.weights[l];
    for (std::size_t i = 0; i < g.decoder.biases[l].size(); ++i) g.decoder.biases[l][i] += via_dec.biases[l][i];
  }
  Matrix dz = std::move(via_rec.input);
  dz += r_lat;
  g.encoder = detail::backward_cached(model.encoder, enc_cache, std::move(dz), true);
  return g;
}

struct AeTrainResult {
  AeModel model;
  std::vector<AeLossBreakdown> history;  // per-epoch sum over mini-batches
  double reconstruction_rmse = 0.0;      // sqrt(mean_i ‖D(E(x_i)) − x_i‖²)
};

inline double reconstruction_rmse(const AeModel& model, const Matrix& x) {
  const Matrix r = decode(model, encode(model, x)) - x;
  double ss = 0.0;
  for (double v : r.data()) ss += v * v;
  return std::sqrt(ss / static_cast<double>(x.rows()));
}

inline double cosine_lr(double lr, double lr_final, std::size_t epoch, std::size_t epochs) {
  if (epochs <= 1) return lr;
  const double frac = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
  return lr_final + 0.5 * (lr - lr_final) * (1.0 + std::cos(std::numbers::pi * frac));
}

// Standardisation x̃ = (x − μ)/σ with a per-column mean μ and a single scale σ
// (RMS of the centered coordinates).
struct AmbientScaling {
  std::vector<double> mean;
  double scale = 1.0;
};

inline AmbientScaling ambient_scaling(const Matrix& x) {
  AmbientScaling s;
  s.mean = column_means(x);
  double ss = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) ss += (x(r, c) - s.mean[c]) * (x(r, c) - s.mean[c]);
  s.scale = std::sqrt(ss / static_cast<double>(x.size()));
  if (!(s.scale > 0.0)) s.scale = 1.0;
  return s;
}

// Rewrites networks trained on standardised data so they act on raw data:
// the encoder's first layer absorbs (x − μ)/σ, the decoder's last layer σ·y + μ.
inline void fold_scaling(AeModel& m, const AmbientScaling& s) {
  DenseLayer& first = m.encoder.layer(0);
  for (std::size_t r = 0; r < first.weight.rows(); ++r) {
    double shift = 0.0;
    for (std::size_t c = 0; c < first.weight.cols(); ++c) {
      first.weight(r, c) /= s.scale;
      shift += first.weight(r, c) * s.mean[c];
    }
    first.bias[r] -= shift;
  }
  DenseLayer& last = m.decoder.layer(m.decoder.num_layers() - 1);
  for (std::size_t r = 0; r < last.weight.rows(); ++r) {
    for (std::size_t c = 0; c < last.weight.cols(); ++c) last.weight(r, c) *= s.scale;
    last.bias[r] = s.scale * last.bias[r] + s.mean[r];
  }
}

// Networks are trained on standardised coordinates with the ambient-space
// terms reweighted by σ (σ² when squared), which makes the optimised objective
// the raw-unit loss; the scaling is folded into the returned model.
inline AeTrainResult train_ae(const PointCloud& cloud, const Embedding& embedding,
                              const AeTrainConfig& cfg) {
  cfg.validate();
  const std::size_t n = cloud.size();
  if (embedding.coords.rows() != n) {
    throw std::invalid_argument("train_ae: embedding has " + std::to_string(embedding.coords.rows()) +
                                " rows, cloud has " + std::to_string(n));
  }
  if (embedding.coords.cols() != cfg.latent_dim) {
    throw std::invalid_argument("train_ae: embedding dimension " +
                                std::to_string(embedding.coords.cols()) +
                                " differs from latent_dim " + std::to_string(cfg.latent_dim));
  }
  const AmbientScaling scaling = ambient_scaling(cloud.points);
  Matrix x = cloud.points;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) x(r, c) = (x(r, c) - scaling.mean[c]) / scaling.scale;
  const double unit = cfg.squared ? scaling.scale * scaling.scale : scaling.scale;
  AeTrainConfig inner = cfg;
  inner.w_rec = cfg.w_rec * unit;
  inner.w_dec = cfg.w_dec * unit;

  AeTrainResult out;
  out.model = make_ae(cloud.dim(), cfg);
  Adam enc_state(out.model.encoder.num_parameters());
  Adam dec_state(out.model.decoder.num_parameters());
  SplitMix64 rng(derive_seed(cfg.seed, 3));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = std::min(cfg.batch_size, n);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const AdamConfig opt{cosine_lr(cfg.lr, cfg.lr_final, epoch, cfg.epochs), 0.9, 0.999, 1e-8};
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    AeLossBreakdown sum;
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t count = std::min(bs, n - start);
      Matrix xb(count, x.cols());
      Matrix mb(count, cfg.latent_dim);
      for (std::size_t r = 0; r < count; ++r) {
        const auto src = order[start + r];
        std::copy(x.row(src).begin(), x.row(src).end(), xb.row(r).begin());
        std::copy(embedding.coords.row(src).begin(), embedding.coords.row(src).end(), mb.row(r).begin());
      }
      const AeGradients g = ae_loss_grad(out.model, xb, mb, inner);
      if (!std::isfinite(g.loss.total)) {
        throw std::runtime_error("train_ae: non-finite loss at epoch " + std::to_string(epoch));
      }
      sum.rec += unit * g.loss.rec;
      sum.lat += g.loss.lat;
      sum.dec += unit * g.loss.dec;
      sum.total += g.loss.total;
      try {
        adam_step(out.model.encoder, g.encoder, enc_state, opt);
        adam_step(out.model.decoder, g.decoder, dec_state, opt);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string("train_ae: diverged at epoch ") + std::to_string(epoch) +
                                 ": " + e.what());
      }
    }
    out.history.push_back(sum);
  }
  fold_scaling(out.model, scaling);
  out.reconstruction_rmse = reconstruction_rmse(out.model, cloud.points);
  return out;
}

inline nlohmann::json to_json(const AeModel& m) {
  return {{"format", "mgeo-ae"}, {"version", 1}, {"encoder", to_json(m.encoder)},
          {"decoder", to_json(m.decoder)}};
}

inline AeModel ae_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "mgeo-ae") throw std::runtime_error("checkpoint: not an mgeo-ae file");
  if (j.value("version", 0) != 1) throw std::runtime_error("checkpoint: unsupported version");
  AeModel m{mlp_from_json(j.at("encoder")), mlp_from_json(j.at("decoder"))};
  if (m.encoder.output_dim() != m.decoder.input_dim() ||
      m.encoder.input_dim() != m.decoder.output_dim()) {
    throw std::runtime_error("checkpoint: encoder/decoder dimensions disagree");
  }
  return m;
}

}  // namespace mgeo
