#include <gtest/gtest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "mgeo/datasets.hpp"
#include "test_support.hpp"

using namespace mgeo;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("mgeo_test_" + name)).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::string load_error(const std::string& text) {
  const auto path = temp_path("bad.csv");
  write_text(path, text);
  try {
    load_csv(path);
  } catch (const std::runtime_error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(SplitMix64, ReferenceStream) {
  // First outputs of SplitMix64 seeded with 0, as published with the algorithm.
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng.next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(rng.next(), 0x06c45d188009454fULL);
}

TEST(SplitMix64, UniformInUnitInterval) {
  SplitMix64 rng(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

TEST(Semisphere, LargeSampleOnSurface) {
  const PointCloud c = sample_semisphere(4956, 1.0, 1);
  ASSERT_EQ(c.size(), 4956u);
  ASSERT_EQ(c.dim(), 3u);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_NEAR(norm2(c.points.row(i)), 1.0, 1e-9);
    EXPECT_GE(c.points(i, 2), 0.0);
  }
  EXPECT_TRUE(c.points.all_finite());
}

TEST(Semisphere, SinglePointHasRadius) {
  for (std::uint64_t seed : {0ULL, 7ULL, 123456789ULL}) {
    const PointCloud c = sample_semisphere(1, 2.5, seed);
    EXPECT_NEAR(norm2(c.points.row(0)), 2.5, 1e-9);
  }
}

TEST(Semisphere, UpperCapHoldsHalfTheArea) {
  const PointCloud c = sample_semisphere(10000, 1.0, 2);
  std::size_t upper = 0;
  for (std::size_t i = 0; i < c.size(); ++i) upper += c.points(i, 2) >= 0.5;
  EXPECT_NEAR(static_cast<double>(upper) / 10000.0, 0.5, 0.02);
}

TEST(Semisphere, ChiSquareOverEqualAreaBands) {
  // Bands of equal height are equal area on a sphere.
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const PointCloud c = sample_semisphere(10000, 1.0, seed);
    std::vector<double> counts(8, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i)
      counts[std::min<std::size_t>(7, static_cast<std::size_t>(c.points(i, 2) * 8.0))] += 1.0;
    double chi2 = 0.0;
    for (double k : counts) chi2 += (k - 1250.0) * (k - 1250.0) / 1250.0;
    EXPECT_LT(chi2, 18.475) << "seed " << seed;  // chi-square(7) upper 1% point
  }
}

TEST(Semisphere, DeterministicAndErrors) {
  EXPECT_EQ(sample_semisphere(50, 1.0, 9).points, sample_semisphere(50, 1.0, 9).points);
  EXPECT_NE(sample_semisphere(50, 1.0, 9).points, sample_semisphere(50, 1.0, 10).points);
  EXPECT_THROW(sample_semisphere(0, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(sample_semisphere(5, 0.0, 1), std::invalid_argument);
}

TEST(SwissRoll, LargeSampleAndHeightMean) {
  const SwissRollParams p;
  const PointCloud c = sample_swissroll(5000, p, 4);
  ASSERT_EQ(c.size(), 5000u);
  ASSERT_TRUE(c.intrinsic.has_value());
  double mean_h = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) mean_h += c.points(i, 1);
  mean_h /= 5000.0;
  EXPECT_NEAR(mean_h, p.height / 2.0, 0.02 * p.height / 2.0);
}

TEST(SwissRoll, SinglePointOnParametricSurface) {
  const SwissRollParams p;
  const PointCloud c = sample_swissroll(1, p, 5);
  const auto x = c.points.row(0);
  // Recover t from the radius, then compare with the closed form t·(cos t, ·, sin t).
  const double t = std::hypot(x[0], x[2]);
  EXPECT_GE(t, p.t_min - 1e-12);
  EXPECT_LE(t, p.t_max + 1e-12);
  EXPECT_LT(std::abs(x[0] - t * std::cos(t)), 1e-12 * t);
  EXPECT_LT(std::abs(x[2] - t * std::sin(t)), 1e-12 * t);
  EXPECT_GE(x[1], 0.0);
  EXPECT_LE(x[1], p.height);
}

TEST(SwissRoll, UniformByArcLength) {
  // Arc-length coordinate should be uniform: compare empirical CDF at quartiles.
  const SwissRollParams p;
  const PointCloud c = sample_swissroll(20000, p, 6);
  const double total = swissroll_arclength(p.t_max, p);
  std::vector<std::size_t> below(3, 0);
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t q = 0; q < 3; ++q) below[q] += (*c.intrinsic)(i, 0) < total * 0.25 * static_cast<double>(q + 1);
  for (std::size_t q = 0; q < 3; ++q)
    EXPECT_NEAR(static_cast<double>(below[q]) / 20000.0, 0.25 * static_cast<double>(q + 1), 0.015);
}

TEST(SwissRoll, ArcLengthMatchesQuadrature) {
  // Simpson's rule on sqrt(1 + t^2) as an independent check.
  const SwissRollParams p;
  const int n = 20000;
  const double h = (p.t_max - p.t_min) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = p.t_min + h * i;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::sqrt(1.0 + t * t);
  }
  s *= h / 3.0;
  EXPECT_NEAR(swissroll_arclength(p.t_max, p), s, 1e-9 * s);
  EXPECT_NEAR(swissroll_arclength(p.t_min, p), 0.0, 1e-12);
  const double mid = swissroll_parameter(0.5 * s, p);
  EXPECT_NEAR(swissroll_arclength(mid, p), 0.5 * s, 1e-9 * s);
}

TEST(SwissRoll, IntrinsicRecoveredFromAmbient) {
  const SwissRollParams p;
  const PointCloud c = sample_swissroll(200, p, 7);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto q = swissroll_intrinsic(c.points.row(i), p);
    EXPECT_NEAR(q[0], (*c.intrinsic)(i, 0), 1e-8);
    EXPECT_NEAR(q[1], (*c.intrinsic)(i, 1), 1e-12);
  }
}

TEST(SwissRoll, InvalidParams) {
  SwissRollParams p;
  p.t_max = p.t_min;
  EXPECT_THROW(sample_swissroll(10, p, 1), std::invalid_argument);
  p = {};
  p.height = -1.0;
  EXPECT_THROW(sample_swissroll(10, p, 1), std::invalid_argument);
  EXPECT_THROW(sample_swissroll(0, SwissRollParams{}, 1), std::invalid_argument);
}

TEST(Csv, RoundTripIsBitwise) {
  SplitMix64 rng(8);
  PointCloud c;
  c.points = mgeo::testing::random_matrix(57, 3, rng, -1e6, 1e6);
  c.points(0, 0) = 1e-300;
  c.points(1, 1) = -0.1;
  const auto path = temp_path("roundtrip.csv");
  save_csv(c, path);
  const PointCloud back = load_csv(path);
  ASSERT_EQ(back.points.rows(), 57u);
  ASSERT_EQ(back.points.cols(), 3u);
  EXPECT_EQ(std::memcmp(back.points.data().data(), c.points.data().data(), 57 * 3 * sizeof(double)), 0);
}

TEST(Csv, EmptyFile) {
  EXPECT_NE(load_error("").find("no data rows"), std::string::npos);
  EXPECT_NE(load_error("x0,x1,x2\n").find("no data rows"), std::string::npos);
}

TEST(Csv, RaggedRowNamesLine) {
  const auto msg = load_error("x0,x1,x2\n1,2,3\n4,5\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Csv, NonNumericNamesLine) {
  const auto msg = load_error("x0,x1\n1,2\n3,abc\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("abc"), std::string::npos) << msg;
}

TEST(Csv, MissingFile) {
  EXPECT_THROW(load_csv(temp_path("does_not_exist.csv")), std::runtime_error);
}
