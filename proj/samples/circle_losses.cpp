// The three curve losses on a decoder that wraps a line onto the unit
// circle. A constant-speed curve is a geodesic; bending it in latent space
// adds tangential acceleration and uneven speed.

#include <cmath>
#include <iostream>

#include "mgeo/mgeo.hpp"

struct Circle {
  std::size_t latent_dim() const { return 1; }
  std::size_t ambient_dim() const { return 2; }
  mgeo::Matrix decode(const mgeo::Matrix& z) const {
    mgeo::Matrix x(z.rows(), 2);
    for (std::size_t r = 0; r < z.rows(); ++r) x(r, 0) = std::cos(z(r, 0)), x(r, 1) = std::sin(z(r, 0));
    return x;
  }
  std::vector<mgeo::Matrix> jacobians(const mgeo::Matrix& z) const {
    std::vector<mgeo::Matrix> j;
    for (std::size_t r = 0; r < z.rows(); ++r) j.push_back(mgeo::Matrix{{-std::sin(z(r, 0))}, {std::cos(z(r, 0))}});
    return j;
  }
  mgeo::Matrix pullback(const mgeo::Matrix& z, const mgeo::Matrix& up) const {
    mgeo::Matrix g(z.rows(), 1);
    for (std::size_t r = 0; r < z.rows(); ++r) g(r, 0) = -std::sin(z(r, 0)) * up(r, 0) + std::cos(z(r, 0)) * up(r, 1);
    return g;
  }
};

int main() {
  using namespace mgeo;
  const Circle dec;
  CubicCurve curve({0.0}, {2.0});
  curve.a = {1.5};
  curve.b = {-1.0};
  const auto ts = uniform_grid(20);
  auto show = [&](const char* label, const CubicCurve& c) {
    const LossBreakdown l = total_loss(dec, c, ts, 1e-3, LossWeights{});
    std::cout << label << ": conspeed " << l.conspeed << "  geo " << l.geo << "  min " << l.min << "\n";
  };
  show("bent   ", curve);
  CurveTrainConfig cfg;
  cfg.epochs = 1500;
  show("trained", train_curve(dec, curve, cfg).curve);
  show("chord  ", CubicCurve({0.0}, {2.0}));
}
