#include <gtest/gtest.h>

#include "mgeo/curve.hpp"
#include "test_support.hpp"

using namespace mgeo;

namespace {

CubicCurve random_curve(SplitMix64& rng, std::size_t d = 3) {
  std::vector<double> z0(d), z1(d);
  for (double& v : z0) v = rng.uniform(-2, 2);
  for (double& v : z1) v = rng.uniform(-2, 2);
  CubicCurve c(z0, z1);
  for (double& v : c.a) v = rng.uniform(-2, 2);
  for (double& v : c.b) v = rng.uniform(-2, 2);
  return c;
}

// Power-basis coefficients of the cubic in coordinate i, evaluated by Horner.
double horner(const CubicCurve& c, std::size_t i, double t) {
  const double c0 = c.z0[i];
  const double c1 = c.z1[i] - c.z0[i] + c.a[i];
  const double c2 = c.b[i] - c.a[i];
  const double c3 = -c.b[i];
  return ((c3 * t + c2) * t + c1) * t + c0;
}

}  // namespace

TEST(CurveEval, EndpointsExactForRandomCoefficients) {
  SplitMix64 rng(1);
  for (int k = 0; k < 1000; ++k) {
    const CubicCurve c = random_curve(rng);
    EXPECT_EQ(curve_eval(c, 0.0), c.z0);
    EXPECT_EQ(curve_eval(c, 1.0), c.z1);
  }
}

TEST(CurveEval, ChordMidpoint) {
  const CubicCurve c({1, -2}, {3, 6});
  EXPECT_EQ(curve_eval(c, 0.5), (std::vector<double>{2, 2}));
}

TEST(CurveEval, MatchesHorner) {
  SplitMix64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const CubicCurve c = random_curve(rng);
    const auto p = curve_eval(c, 0.3);
    for (std::size_t i = 0; i < c.dim(); ++i) EXPECT_NEAR(p[i], horner(c, i, 0.3), 1e-15 * 8);
  }
}

TEST(CurveVelocity, ClosedForms) {
  SplitMix64 rng(3);
  CubicCurve chord({0.5, 1}, {2, -1});
  for (double t : {0.0, 0.4, 1.0}) EXPECT_EQ(curve_velocity(chord, t), (std::vector<double>{1.5, -2}));
  CubicCurve c = random_curve(rng, 2);
  c.b = {0, 0};
  const auto v0 = curve_velocity(c, 0.0);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(v0[i], c.z1[i] - c.z0[i] + c.a[i], 1e-15);
}

TEST(CurveVelocity, MatchesFiniteDifferences) {
  SplitMix64 rng(4);
  const double h = 1e-6;
  for (int k = 0; k < 100; ++k) {
    const CubicCurve c = random_curve(rng);
    const double t = rng.uniform();
    const auto v = curve_velocity(c, t), p = curve_eval(c, t + h), m = curve_eval(c, t - h);
    for (std::size_t i = 0; i < c.dim(); ++i) EXPECT_NEAR(v[i], (p[i] - m[i]) / (2 * h), 1e-8);
  }
}

TEST(CurveVelocity, IntegratesToDisplacement) {
  SplitMix64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const CubicCurve c = random_curve(rng);
    // Simpson on two panels is exact for the quadratic velocity.
    const auto v0 = curve_velocity(c, 0.0), vm = curve_velocity(c, 0.5), v1 = curve_velocity(c, 1.0);
    for (std::size_t i = 0; i < c.dim(); ++i)
      EXPECT_NEAR((v0[i] + 4 * vm[i] + v1[i]) / 6.0, c.z1[i] - c.z0[i], 1e-10);
  }
}

TEST(CurveAccel, ClosedForms) {
  const CubicCurve chord({0, 0}, {1, 1});
  EXPECT_EQ(curve_accel(chord, 0.7), (std::vector<double>{0, 0}));
  CubicCurve c({0, 0}, {1, 1});
  c.a = {0.25, -3};
  EXPECT_EQ(curve_accel(c, 0.0), (std::vector<double>{-0.5, 6}));
}

TEST(CurveAccel, SecondDifferenceIsExactForCubics) {
  SplitMix64 rng(6);
  for (int k = 0; k < 200; ++k) {
    const CubicCurve c = random_curve(rng);
    const double t = rng.uniform();
    // No truncation error for a cubic, so a wide stencil isolates exactness
    // from cancellation error (which grows like eps/h^2).
    const double h = 1e-2;
    const auto p = curve_eval(c, t + h), m = curve_eval(c, t - h), z = curve_eval(c, t), a = curve_accel(c, t);
    for (std::size_t i = 0; i < c.dim(); ++i) EXPECT_NEAR((p[i] + m[i] - 2 * z[i]) / (h * h), a[i], 1e-9);
  }
}

TEST(CurveAccel, SecondDifferenceExactInExactArithmetic) {
  // Dyadic coefficients and step keep every operation exact in binary64,
  // so a ~1e-4 step reproduces the acceleration to the last bit.
  SplitMix64 rng(7);
  const double h = 0x1p-13;
  for (int k = 0; k < 200; ++k) {
    auto dyadic = [&] { return static_cast<double>(static_cast<int>(rng.below(64)) - 32) / 16.0; };
    CubicCurve c({dyadic(), dyadic()}, {dyadic(), dyadic()});
    c.a = {dyadic(), dyadic()};
    c.b = {dyadic(), dyadic()};
    const double t = static_cast<double>(rng.below(16)) / 16.0;
    const auto p = curve_eval(c, t + h), m = curve_eval(c, t - h), z = curve_eval(c, t), a = curve_accel(c, t);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR((p[i] + m[i] - 2 * z[i]) / (h * h), a[i], 1e-9);
  }
}

TEST(CurveParameters, LayoutAndValidation) {
  CubicCurve c({0, 0}, {1, 1});
  c.set_free_parameters(std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(c.a, (std::vector<double>{1, 2}));
  EXPECT_EQ(c.b, (std::vector<double>{3, 4}));
  EXPECT_EQ(c.free_parameters(), (std::vector<double>{1, 2, 3, 4}));
  EXPECT_THROW(c.set_free_parameters(std::vector<double>{1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(CubicCurve({0, 0}, {1}), std::invalid_argument);
  // Partial derivatives of c(t) with respect to a and b.
  const double t = 0.3, h = 1e-6;
  CubicCurve d = c;
  d.a[0] += h;
  EXPECT_NEAR((curve_eval(d, t)[0] - curve_eval(c, t)[0]) / h, curve_weight_a(t), 1e-8);
  d = c;
  d.b[1] += h;
  EXPECT_NEAR((curve_eval(d, t)[1] - curve_eval(c, t)[1]) / h, curve_weight_b(t), 1e-8);
}

TEST(CurveJson, RoundTripAndErrors) {
  SplitMix64 rng(8);
  const CubicCurve c = random_curve(rng);
  EXPECT_EQ(curve_from_json(nlohmann::json::parse(to_json(c).dump())), c);
  auto j = to_json(c);
  j["b"] = {1.0};
  EXPECT_THROW(curve_from_json(j), std::runtime_error);
}
