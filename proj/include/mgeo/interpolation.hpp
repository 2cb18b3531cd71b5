#pragma once

// Trains the free coefficients of a CubicCurve against a frozen decoder.

#include <cstdint>
#include <vector>

#include "mgeo/curve.hpp"
#include "mgeo/decoder.hpp"
#include "mgeo/losses.hpp"
#include "mgeo/nn.hpp"
#include "mgeo/rng.hpp"

namespace mgeo {

struct CurveTrainConfig {
  std::size_t n_samples = 20;   // grid intervals; n+1 sample points
  double dt = 1e-3;             // finite-difference step in t
  LossWeights weights;
  std::size_t epochs = 2000;
  double lr = 1e-2;
  bool resample_random = false; // redraw interior t_i every epoch
  std::uint64_t seed = 0;
};

struct CurveTrainResult {
  CubicCurve curve;
  std::vector<LossBreakdown> history;  // loss before each update
};

template <LatentDecoder Decoder>
CurveTrainResult train_curve(const Decoder& decoder, CubicCurve curve, const CurveTrainConfig& cfg) {
  cfg.weights.validate();
  SplitMix64 rng(derive_seed(cfg.seed, 0xC0FFEE));
  Adam adam(2 * curve.dim());
  const AdamConfig opt{cfg.lr, 0.9, 0.999, 1e-8};
  CurveTrainResult out;
  out.history.reserve(cfg.epochs);
  const auto grid = uniform_grid(cfg.n_samples);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto ts = cfg.resample_random ? random_grid(cfg.n_samples, rng, 2.0 * cfg.dt) : grid;
    const LossGradient lg = total_loss_grad(decoder, curve, ts, cfg.dt, cfg.weights);
    out.history.push_back(lg.loss);
    auto params = curve.free_parameters();
    adam.step(params, lg.grad, opt);
    curve.set_free_parameters(params);
    if (!curve.all_finite()) throw std::runtime_error("train_curve: coefficients became non-finite");
  }
  out.curve = std::move(curve);
  return out;
}

}  // namespace mgeo
