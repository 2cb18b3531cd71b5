#pragma once

// Endpoint-constrained cubic latent curve
//
//   c(t) = (1 − t)·z0 + t·z1 + t(1 − t)·(a + b·t)
//
// c(0) = z0 and c(1) = z1 for every (a, b); the 2·d entries of a and b are
// the free coefficients trained by gradient descent.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace mgeo {

struct CubicCurve {
  std::vector<double> z0, z1, a, b;

  CubicCurve() = default;

  // The linear chord between z0 and z1 (a = b = 0).
  CubicCurve(std::vector<double> start, std::vector<double> end)
      : z0(std::move(start)), z1(std::move(end)), a(z0.size(), 0.0), b(z0.size(), 0.0) {
    if (z0.size() != z1.size()) throw std::invalid_argument("CubicCurve: endpoint dimension mismatch");
  }

  std::size_t dim() const { return z0.size(); }

  // Free coefficients laid out as [a..., b...].
  std::vector<double> free_parameters() const {
    std::vector<double> p(a);
    p.insert(p.end(), b.begin(), b.end());
    return p;
  }

  void set_free_parameters(std::span<const double> p) {
    if (p.size() != 2 * dim()) {
      throw std::invalid_argument("CubicCurve: expected " + std::to_string(2 * dim()) +
                                  " free parameters, got " + std::to_string(p.size()));
    }
    a.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(dim()));
    b.assign(p.begin() + static_cast<std::ptrdiff_t>(dim()), p.end());
  }

  bool all_finite() const {
    for (const auto* v : {&z0, &z1, &a, &b})
      for (double x : *v)
        if (!std::isfinite(x)) return false;
    return true;
  }

  bool operator==(const CubicCurve&) const = default;
};

inline std::vector<double> curve_eval(const CubicCurve& c, double t) {
  std::vector<double> out(c.dim());
  const double w = t * (1.0 - t);
  for (std::size_t i = 0; i < c.dim(); ++i)
    out[i] = (1.0 - t) * c.z0[i] + t * c.z1[i] + w * (c.a[i] + c.b[i] * t);
  return out;
}

inline std::vector<double> curve_velocity(const CubicCurve& c, double t) {
  std::vector<double> out(c.dim());
  for (std::size_t i = 0; i < c.dim(); ++i)
    out[i] = (c.z1[i] - c.z0[i]) + (1.0 - 2.0 * t) * (c.a[i] + c.b[i] * t) + t * (1.0 - t) * c.b[i];
  return out;
}

inline std::vector<double> curve_accel(const CubicCurve& c, double t) {
  std::vector<double> out(c.dim());
  for (std::size_t i = 0; i < c.dim(); ++i) out[i] = -2.0 * c.a[i] + 2.0 * c.b[i] - 6.0 * c.b[i] * t;
  return out;
}

// ∂c(t)/∂a_i and ∂c(t)/∂b_i (the same for every coordinate i).
inline double curve_weight_a(double t) { return t * (1.0 - t); }
inline double curve_weight_b(double t) { return t * t * (1.0 - t); }

inline nlohmann::json to_json(const CubicCurve& c) {
  return {{"z0", c.z0}, {"z1", c.z1}, {"a", c.a}, {"b", c.b}};
}

inline CubicCurve curve_from_json(const nlohmann::json& j) {
  CubicCurve c;
  c.z0 = j.at("z0").get<std::vector<double>>();
  c.z1 = j.at("z1").get<std::vector<double>>();
  c.a = j.at("a").get<std::vector<double>>();
  c.b = j.at("b").get<std::vector<double>>();
  const std::size_t d = c.z0.size();
  if (d == 0 || c.z1.size() != d || c.a.size() != d || c.b.size() != d) {
    throw std::runtime_error("curve: inconsistent coefficient lengths");
  }
  if (!c.all_finite()) throw std::runtime_error("curve: non-finite coefficient");
  return c;
}

}  // namespace mgeo
