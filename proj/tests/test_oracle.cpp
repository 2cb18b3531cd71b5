#include <gtest/gtest.h>

#include <numbers>

#include "mgeo/oracle.hpp"
#include "test_support.hpp"

using namespace mgeo;
using mgeo::testing::CircleDecoder;
using mgeo::testing::random_matrix;

namespace {

std::vector<double> random_unit(SplitMix64& rng, bool upper = false) {
  std::vector<double> p(3);
  do {
    for (double& v : p) v = rng.normal();
  } while (norm2(p) < 1e-3);
  const double n = norm2(p);
  for (double& v : p) v /= n;
  if (upper) p[2] = std::abs(p[2]);
  return p;
}

double angle(std::span<const double> a, std::span<const double> b) {
  return std::acos(std::clamp(dot(a, b) / (norm2(a) * norm2(b)), -1.0, 1.0));
}

}  // namespace

TEST(GreatCircle, QuarterCircle) {
  const auto g = great_circle(std::vector<double>{1, 0, 0}, std::vector<double>{0, 1, 0}, 10);
  EXPECT_NEAR(g.length, std::numbers::pi / 2, 1e-15);
  EXPECT_EQ(g.points.rows(), 11u);
  for (std::size_t i = 0; i < 11; ++i) EXPECT_NEAR(norm2(g.points.row(i)), 1.0, 1e-14);
}

TEST(GreatCircle, LengthVanishesLinearlyForCloseEndpoints) {
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const std::vector<double> p0{1, 0, 0}, p1{std::cos(eps), std::sin(eps), 0};
    EXPECT_NEAR(great_circle(p0, p1, 4).length / eps, 1.0, 1e-6);
  }
  const std::vector<double> p{0, 0, 1};
  EXPECT_EQ(great_circle(p, p, 3).length, 0.0);
}

TEST(GreatCircle, PolylineConvergesFromBelow) {
  SplitMix64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const auto p0 = random_unit(rng), p1 = random_unit(rng);
    const double exact = great_circle(p0, p1, 1).length;
    EXPECT_NEAR(polyline_length(great_circle(p0, p1, 1000).points), exact, 1e-5);
    double prev = 0.0;
    for (std::size_t m : {1u, 2u, 4u, 8u, 64u}) {
      const double len = polyline_length(great_circle(p0, p1, m).points);
      EXPECT_GE(len, prev - 1e-14);
      EXPECT_LE(len, exact + 1e-14);
      prev = len;
    }
  }
}

TEST(GreatCircle, SymmetricAndRotationInvariant) {
  SplitMix64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const auto p0 = random_unit(rng), p1 = random_unit(rng);
    const double l = great_circle(p0, p1, 1).length;
    EXPECT_NEAR(great_circle(p1, p0, 1).length, l, 1e-14);
    const Matrix q = mgeo::testing::random_rotation3(rng);
    EXPECT_NEAR(great_circle(matvec(q, p0), matvec(q, p1), 1).length, l, 1e-12);
    EXPECT_NEAR(l, angle(p0, p1), 1e-12);
  }
}

TEST(GreatCircle, Errors) {
  try {
    great_circle(std::vector<double>{0, 0, 1}, std::vector<double>{0, 0, -1}, 4);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("geodesic not unique"), std::string::npos);
  }
  EXPECT_THROW(great_circle(std::vector<double>{1, 0, 0}, std::vector<double>{0, 2, 0}, 4), std::invalid_argument);
  EXPECT_THROW(great_circle(std::vector<double>{1, 0, 0}, std::vector<double>{0, 1, 0}, 0), std::invalid_argument);
}

TEST(SwissRollGeodesic, ClosedForms) {
  const SwissRollParams p;
  const std::vector<double> q{10, 3};
  EXPECT_EQ(swissroll_geodesic(q, q, p), 0.0);
  EXPECT_EQ(swissroll_geodesic(std::vector<double>{0, 0}, std::vector<double>{3, 4}, p), 5.0);
  EXPECT_THROW(swissroll_geodesic(std::vector<double>{-5, 0}, q, p), std::invalid_argument);
  EXPECT_THROW(swissroll_geodesic(std::vector<double>{5, 11}, q, p), std::invalid_argument);
}

TEST(SwissRollGeodesic, AgreesWithDenseGraphShortestPath) {
  const SwissRollParams p;
  const PointCloud c = sample_swissroll(8000, p, 3);
  SplitMix64 rng(4);
  for (int k = 0; k < 5; ++k) {
    const std::size_t i = rng.below(c.size()), j = rng.below(c.size());
    const double truth = swissroll_geodesic(c.intrinsic->row(i), c.intrinsic->row(j), p);
    if (truth < 10.0) continue;  // short pairs are dominated by graph granularity
    const double graph = knn_graph_shortest_path(c.points, 30, i, j);
    EXPECT_GE(graph, truth * (1.0 - 1e-9));
    EXPECT_LT(graph / truth, 1.02) << "pair " << i << ',' << j;
  }
}

TEST(Polyline, HandExamples) {
  Matrix line(6, 2);
  for (std::size_t i = 0; i < 6; ++i) line(i, 0) = line(i, 1) = static_cast<double>(i);
  EXPECT_NEAR(uniformity_cv(line), 0.0, 1e-15);
  const Matrix square{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}};
  EXPECT_EQ(polyline_length(square), 4.0);
  const Matrix two{{0, 0}, {1, 0}, {4, 0}};
  EXPECT_EQ(uniformity_cv(two), 0.5);
  EXPECT_THROW(polyline_length(Matrix(1, 2)), std::invalid_argument);
  EXPECT_THROW(uniformity_cv(Matrix(1, 2)), std::invalid_argument);
}

TEST(TangentialResidual, StraightLineGuardedToZero) {
  // Dyadic map, endpoints and grid keep the stencil arithmetic exact, so the
  // second difference is exactly zero and only the guard is exercised.
  const AffineDecoder lin(Matrix{{1, 0.5}, {-2, 0.25}, {0, 1}}, {0.5, 1, -1});
  const auto r = tangential_residual(lin, CubicCurve({0, 0}, {1, 2}), uniform_grid(16), 0x1p-10);
  EXPECT_EQ(r.mean, 0.0);
  EXPECT_TRUE(r.excluded.empty());
}

TEST(TangentialResidual, CircleConstantSpeed) {
  const auto r = tangential_residual(CircleDecoder{}, CubicCurve({0.2}, {2.0}), uniform_grid(20), 1e-3);
  EXPECT_LT(r.mean, 1e-6);
}

TEST(TangentialResidual, CircleQuadraticReparametrisation) {
  // z(t) = θ t² written as a cubic with a = −θ, b = 0.
  const double theta = std::numbers::pi / 2;
  CubicCurve c({0.0}, {theta});
  c.a = {-theta};
  const auto r = tangential_residual(CircleDecoder{}, c, uniform_grid(20), 1e-3);
  EXPECT_GT(r.mean, 0.1);
  for (double v : r.per_sample) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0 + 1e-12);
  }
}

TEST(TangentialResidual, AlwaysInUnitInterval) {
  SplitMix64 rng(5);
  for (int k = 0; k < 10; ++k) {
    MlpModel m = MlpModel::glorot({2, 8, 3}, Activation::tanh, rng.next());
    const MlpDecoder dec(m);
    CubicCurve c({rng.uniform(-1, 1), rng.uniform(-1, 1)}, {rng.uniform(-1, 1), rng.uniform(-1, 1)});
    c.a = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    c.b = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto r = tangential_residual(dec, c, uniform_grid(20), 1e-3);
    EXPECT_GE(r.mean, 0.0);
    EXPECT_LE(r.mean, 1.0 + 1e-12);
  }
}

TEST(TangentialResidual, RankDeficientSamplesExcluded) {
  const mgeo::testing::ConstantDecoder dec;
  const auto r = tangential_residual(dec, CubicCurve({0, 0}, {1, 1}), uniform_grid(4), 1e-3);
  EXPECT_EQ(r.excluded.size(), 5u);
  EXPECT_EQ(r.mean, 0.0);
}

TEST(Procrustes, ExactAffineMatch) {
  SplitMix64 rng(6);
  const Matrix a = random_matrix(50, 2, rng);
  Matrix b = matmul(a, Matrix{{2, 1}, {-0.5, 3}});
  for (std::size_t i = 0; i < 50; ++i) b(i, 0) += 4.0, b(i, 1) -= 1.0;
  EXPECT_LT(procrustes_affine(a, b), 1e-10);
}

TEST(Procrustes, NoiseFloor) {
  SplitMix64 rng(7);
  const std::size_t n = 4000, d = 2;
  const double sigma = 0.01;
  const Matrix a = random_matrix(n, d, rng);
  Matrix b = a;
  for (double& v : b.data()) v += sigma * rng.normal();
  const double expected = sigma * std::sqrt(static_cast<double>(n * d)) / frobenius_norm(b);
  EXPECT_NEAR(procrustes_affine(a, b) / expected, 1.0, 0.05);
}

TEST(Procrustes, ShuffledRowsAreMisaligned) {
  SplitMix64 rng(8);
  const Matrix a = random_matrix(200, 2, rng);
  Matrix b = a;
  for (std::size_t i = b.rows(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    for (std::size_t c = 0; c < 2; ++c) std::swap(b(i - 1, c), b(j, c));
  }
  EXPECT_GT(procrustes_affine(a, b), 0.5);
  EXPECT_THROW(procrustes_affine(Matrix(2, 2), Matrix(2, 2)), std::invalid_argument);
}

TEST(GraphPath, ChainAndTrivialCases) {
  Matrix chain(50, 2);
  for (std::size_t i = 0; i < 50; ++i) chain(i, 0) = 0.1 * static_cast<double>(i);
  EXPECT_NEAR(knn_graph_shortest_path(chain, 2, 0, 49), 4.9, 1e-12);
  EXPECT_EQ(knn_graph_shortest_path(chain, 2, 7, 7), 0.0);
  Matrix split(6, 1);
  for (std::size_t i = 0; i < 6; ++i) split(i, 0) = i < 3 ? static_cast<double>(i) : 100.0 + static_cast<double>(i);
  EXPECT_THROW(knn_graph_shortest_path(split, 1, 0, 5), std::runtime_error);
}

namespace {

// Graph/great-circle length ratios for random pairs at angular distance in
// [0.5, π/2), neighbourhood size k.
std::vector<double> semisphere_graph_ratios(const PointCloud& c, std::size_t k, int pairs) {
  SplitMix64 rng(10);
  std::vector<double> out;
  while (static_cast<int>(out.size()) < pairs) {
    const std::size_t i = rng.below(c.size()), j = rng.below(c.size());
    const double truth = great_circle(c.points.row(i), c.points.row(j), 1).length;
    if (truth >= std::numbers::pi / 2 || truth < 0.5) continue;
    out.push_back(knn_graph_shortest_path(c.points, k, i, j) / truth);
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST(GraphPath, SemisphereAgreesWithGreatCircle) {
  // A 10-neighbour graph on 3000 points zig-zags by about 5%; the 3% band is
  // reached with a denser neighbourhood.
  const PointCloud c = sample_semisphere(3000, 1.0, 9);
  for (double r : semisphere_graph_ratios(c, 30, 8)) EXPECT_NEAR(r, 1.0, 0.03);
}

TEST(GraphPath, SemisphereStretchShrinksWithNeighbourhood) {
  const PointCloud c = sample_semisphere(3000, 1.0, 9);
  const auto r10 = semisphere_graph_ratios(c, 10, 8);
  const auto r20 = semisphere_graph_ratios(c, 20, 8);
  const auto r30 = semisphere_graph_ratios(c, 30, 8);
  for (const auto* v : {&r10, &r20, &r30})
    for (double r : *v) {
      EXPECT_GT(r, 0.99);
      EXPECT_LT(r, 1.15);
    }
  EXPECT_GT(mean_of(r10), mean_of(r20));
  EXPECT_GT(mean_of(r20), mean_of(r30));
}

TEST(NearestDistances, SmallExamples) {
  const Matrix ref{{0, 0}, {1, 0}, {5, 0}};
  EXPECT_NEAR(mean_nearest_distance(Matrix{{0.5, 0}, {4, 0}}, ref), 0.75, 1e-15);
  EXPECT_EQ(median_nn_distance(ref), 1.0);
}
