#pragma once

// Synthetic manifold samplers and CSV persistence for point clouds.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgeo/linalg.hpp"
#include "mgeo/rng.hpp"

namespace mgeo {

struct PointCloud {
  Matrix points;                          // N x D ambient coordinates
  std::optional<std::string> manifold_tag;
  std::uint64_t seed = 0;
  // Intrinsic (arclength, height) coordinates for swiss-roll samples.
  std::optional<Matrix> intrinsic;

  std::size_t size() const { return points.rows(); }
  std::size_t dim() const { return points.cols(); }
};

struct SwissRollParams {
  double t_min = 1.5 * std::numbers::pi;
  double t_max = 4.5 * std::numbers::pi;
  double height = 10.0;
  double radius_scale = 1.0;

  void validate() const {
    if (!(t_min > 0.0)) throw std::invalid_argument("swiss-roll: t_min must be > 0");
    if (!(t_max > t_min)) throw std::invalid_argument("swiss-roll: t_max must exceed t_min");
    if (!(height > 0.0)) throw std::invalid_argument("swiss-roll: height must be > 0");
    if (!(radius_scale > 0.0)) throw std::invalid_argument("swiss-roll: radius_scale must be > 0");
  }
};

inline PointCloud sample_semisphere(std::size_t n, double radius, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be > 0");
  SplitMix64 rng(seed);
  PointCloud cloud;
  cloud.points = Matrix(n, 3);
  cloud.manifold_tag = "semisphere";
  cloud.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    // Archimedes: z uniform on [0, R] is area-uniform on the hemisphere.
    const double z = radius * rng.uniform();
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    const double r = std::sqrt(std::max(0.0, radius * radius - z * z));
    cloud.points(i, 0) = r * std::cos(phi);
    cloud.points(i, 1) = r * std::sin(phi);
    cloud.points(i, 2) = z;
  }
  return cloud;
}

// ∫ sqrt(1 + t²) dt, the unscaled arc length of the spiral (t cos t, t sin t).
inline double spiral_arclength(double t) {
  return 0.5 * (t * std::sqrt(1.0 + t * t) + std::asinh(t));
}

inline double swissroll_arclength(double t, const SwissRollParams& p) {
  return p.radius_scale * (spiral_arclength(t) - spiral_arclength(p.t_min));
}

// Inverse of swissroll_arclength on [t_min, t_max] by bisection.
inline double swissroll_parameter(double arclength, const SwissRollParams& p) {
  double lo = p.t_min;
  double hi = p.t_max;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (swissroll_arclength(mid, p) < arclength) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline std::vector<double> swissroll_point(double t, double h, const SwissRollParams& p) {
  return {p.radius_scale * t * std::cos(t), h, p.radius_scale * t * std::sin(t)};
}

// (arclength, height) of an ambient point lying on the roll.
inline std::vector<double> swissroll_intrinsic(std::span<const double> x, const SwissRollParams& p) {
  if (x.size() != 3) throw std::invalid_argument("swiss-roll point must be 3-D");
  const double t = std::hypot(x[0], x[2]) / p.radius_scale;
  return {swissroll_arclength(t, p), x[1]};
}

inline PointCloud sample_swissroll(std::size_t n, const SwissRollParams& params,
                                   std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  params.validate();
  SplitMix64 rng(seed);
  const double total = swissroll_arclength(params.t_max, params);
  PointCloud cloud;
  cloud.points = Matrix(n, 3);
  cloud.intrinsic = Matrix(n, 2);
  cloud.manifold_tag = "swissroll";
  cloud.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = total * rng.uniform();
    const double h = params.height * rng.uniform();
    const double t = swissroll_parameter(s, params);
    const auto p = swissroll_point(t, h, params);
    for (std::size_t c = 0; c < 3; ++c) cloud.points(i, c) = p[c];
    (*cloud.intrinsic)(i, 0) = swissroll_arclength(t, params);
    (*cloud.intrinsic)(i, 1) = h;
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_matrix_csv(std::ostream& os, const Matrix& m, const std::string& prefix = "x") {
  for (std::size_t c = 0; c < m.cols(); ++c) os << (c ? "," : "") << prefix << c;
  os << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) os << (c ? "," : "") << format_double(m(r, c));
    os << '\n';
  }
}

inline void save_matrix_csv(const Matrix& m, const std::string& path,
                            const std::string& prefix = "x") {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_matrix_csv(os, m, prefix);
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

inline Matrix read_matrix_csv(std::istream& is, const std::string& name = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  std::size_t cols = 0;
  bool have_header = false;
  std::vector<double> data;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      cols = 1;
      for (char ch : line) cols += ch == ',';
      have_header = true;
      continue;
    }
    std::size_t fields = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t end = line.find(',', start);
      const std::string_view field(line.data() + start,
                                   (end == std::string::npos ? line.size() : end) - start);
      double v = 0.0;
      const auto* first = field.data();
      const auto* last = field.data() + field.size();
      while (first < last && *first == ' ') ++first;
      if (first < last && *first == '+') ++first;
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last || first == last) {
        throw std::runtime_error(name + ": line " + std::to_string(line_no) +
                                 ": non-numeric field '" + std::string(field) + "'");
      }
      if (!std::isfinite(v)) {
        throw std::runtime_error(name + ": line " + std::to_string(line_no) +
                                 ": non-finite value");
      }
      data.push_back(v);
      ++fields;
      if (end == std::string::npos) break;
      start = end + 1;
    }
    if (fields != cols) {
      throw std::runtime_error(name + ": line " + std::to_string(line_no) + ": expected " +
                               std::to_string(cols) + " fields, found " +
                               std::to_string(fields));
    }
    ++rows;
  }
  if (rows == 0) throw std::runtime_error(name + ": no data rows");
  return Matrix(rows, cols, std::move(data));
}

inline Matrix load_matrix_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_matrix_csv(is, path);
}

inline void save_csv(const PointCloud& cloud, const std::string& path) {
  save_matrix_csv(cloud.points, path, "x");
}

inline PointCloud load_csv(const std::string& path) {
  PointCloud cloud;
  cloud.points = load_matrix_csv(path);
  return cloud;
}

}  // namespace mgeo
