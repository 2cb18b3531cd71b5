#pragma once

// Dense double-precision linear algebra used throughout mgeo: a row-major
// Matrix, products, a cyclic Jacobi symmetric eigensolver, a shift-invert
// subspace iteration for the bottom of a PSD spectrum, Cholesky, least
// squares, and exact k-nearest-neighbour search.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mgeo/rng.hpp"

namespace mgeo {

class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw std::invalid_argument("Matrix: data length " + std::to_string(data_.size()) +
                                  " does not match shape " + std::to_string(rows_) + "x" +
                                  std::to_string(cols_));
    }
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix column(std::span<const double> v) {
    return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
  }

  static Matrix row_vector(std::span<const double> v) {
    return Matrix(1, v.size(), std::vector<double>(v.begin(), v.end()));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> col(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  Matrix& operator+=(const Matrix& o) {
    check_same(o, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same(o, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  bool operator==(const Matrix&) const = default;

private:
  void check_same(const Matrix& o, const char* what) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw std::invalid_argument(std::string(what) + ": shape mismatch " + shape() + " vs " +
                                  o.shape());
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct EigenResult {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column j pairs with values[j]
};

// ---------------------------------------------------------------------------
// Vector helpers

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

// ---------------------------------------------------------------------------
// Matrix kernels

inline double frobenius_norm(const Matrix& a) { return norm2(a.data()); }

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  return t;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: dimension mismatch " + a.shape() + " x " + b.shape());
  }
  Matrix c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* bk = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

// aᵀ·b without forming the transpose.
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("matmul_tn: dimension mismatch " + a.shape() + "^T x " +
                                b.shape());
  }
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const auto ak = a.row(k);
    const auto bk = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      double* ci = c.row(i).data();
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

// a·bᵀ; rows of both operands are contiguous so this is a table of dots.
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("matmul_nt: dimension mismatch " + a.shape() + " x " +
                                b.shape() + "^T");
  }
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(a.row(i), b.row(j));
  return c;
}

inline std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw std::invalid_argument("matvec: dimension mismatch " + a.shape() + " x " +
                                std::to_string(x.size()));
  }
  std::vector<double> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

inline std::vector<double> column_means(const Matrix& a) {
  std::vector<double> mean(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) mean[c] += a(r, c);
  for (double& m : mean) m /= static_cast<double>(std::max<std::size_t>(a.rows(), 1));
  return mean;
}

inline Matrix center_columns(Matrix a) {
  const auto mean = column_means(a);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) -= mean[c];
  return a;
}

inline double asymmetry(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double d = a(i, j) - a(j, i);
      s += 2.0 * d * d;
    }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Symmetric eigensolver (cyclic Jacobi)

struct JacobiOptions {
  int max_sweeps = 100;
  double symmetry_tol = 1e-10;  // relative to ‖A‖_F
};

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

inline EigenResult sorted_eigen(const Matrix& diag_form, const Matrix& v) {
  const std::size_t n = diag_form.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return diag_form(x, x) < diag_form(y, y);
  });
  EigenResult out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = diag_form(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

}  // namespace detail

inline EigenResult sym_eig(const Matrix& input, const JacobiOptions& opts = {}) {
  if (input.rows() != input.cols()) {
    throw std::invalid_argument("sym_eig: matrix must be square, got " + input.shape());
  }
  const std::size_t n = input.rows();
  const double scale = frobenius_norm(input);
  if (asymmetry(input) > opts.symmetry_tol * std::max(scale, 1e-300)) {
    throw std::invalid_argument("sym_eig: matrix is not symmetric");
  }
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (input(i, j) + input(j, i));
  Matrix v = Matrix::identity(n);
  if (n <= 1 || scale == 0.0) return detail::sorted_eigen(a, v);

  const double target = std::numeric_limits<double>::epsilon() * scale * 1e-2;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    if (detail::off_diagonal_norm(a) <= target) return detail::sorted_eigen(a, v);
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Entries below the resolution of both diagonal terms are zeroed.
        if (sweep > 3 && std::abs(apq) < 1e-18 * (std::abs(app) + std::abs(aqq)) ) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  const double off = detail::off_diagonal_norm(a);
  if (off <= 1e-12 * scale) return detail::sorted_eigen(a, v);
  std::ostringstream msg;
  msg << "sym_eig: Jacobi did not converge in " << opts.max_sweeps
      << " sweeps; off-diagonal residual " << off << " (||A||_F = " << scale << ")";
  throw std::runtime_error(msg.str());
}

// ---------------------------------------------------------------------------
// Cholesky and triangular solves

// In-place lower Cholesky factor; returns false if a pivot is not positive.
inline bool cholesky_in_place(Matrix& a) {
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double* li = a.row(i).data();
    for (std::size_t j = 0; j <= i; ++j) {
      const double* lj = a.row(j).data();
      double s = li[j];
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      if (i == j) {
        if (!(s > 0.0)) return false;
        li[i] = std::sqrt(s);
      } else {
        li[j] = s / lj[j];
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) li[j] = 0.0;
  }
  return true;
}

inline Matrix cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: non-square " + a.shape());
  Matrix l = a;
  if (!cholesky_in_place(l)) throw std::runtime_error("cholesky: matrix not positive definite");
  return l;
}

// Solves (L·Lᵀ)·x = b in place.
inline void cholesky_solve_in_place(const Matrix& l, std::span<double> b) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double* li = l.row(i).data();
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= li[k] * b[k];
    b[i] = s / li[i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    b[ii] /= l(ii, ii);
    const double bi = b[ii];
    const double* li = l.row(ii).data();
    for (std::size_t k = 0; k < ii; ++k) b[k] -= li[k] * bi;
  }
}

// ---------------------------------------------------------------------------
// Orthonormalization and least squares

// Modified Gram-Schmidt on the columns of q (applied twice). Returns the
// number of columns whose norm collapsed below tol before normalization.
inline std::size_t orthonormalize_columns(Matrix& q, double tol = 1e-13) {
  const std::size_t n = q.rows();
  const std::size_t m = q.cols();
  std::size_t collapsed = 0;
  std::vector<double> col(n);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = q(i, j);
    const double initial = norm2(col);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += q(i, k) * col[i];
        for (std::size_t i = 0; i < n; ++i) col[i] -= s * q(i, k);
      }
    }
    double nrm = norm2(col);
    if (nrm <= tol * std::max(initial, 1.0)) {
      ++collapsed;
      nrm = 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) q(i, j) = nrm > 0.0 ? col[i] / nrm : 0.0;
  }
  return collapsed;
}

// argmin_X ‖A·X − B‖_F via Householder QR. Requires full column rank.
inline Matrix lstsq(const Matrix& a_in, const Matrix& b_in) {
  if (a_in.rows() != b_in.rows()) {
    throw std::invalid_argument("lstsq: row mismatch " + a_in.shape() + " vs " + b_in.shape());
  }
  if (a_in.rows() < a_in.cols()) {
    throw std::invalid_argument("lstsq: underdetermined system " + a_in.shape());
  }
  Matrix a = a_in;
  Matrix b = b_in;
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const double scale = frobenius_norm(a_in);
  std::vector<double> v(m);
  for (std::size_t k = 0; k < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k; i < m; ++i) alpha += a(i, k) * a(i, k);
    alpha = std::sqrt(alpha);
    if (alpha <= 1e-13 * std::max(scale, 1e-300)) {
      throw std::runtime_error("lstsq: matrix is rank deficient");
    }
    if (a(k, k) > 0) alpha = -alpha;
    for (std::size_t i = 0; i < m; ++i) v[i] = i < k ? 0.0 : a(i, k);
    v[k] -= alpha;
    const double vnorm2 = dot(std::span<const double>(v).subspan(k), std::span<const double>(v).subspan(k));
    if (vnorm2 == 0.0) continue;
    auto reflect = [&](Matrix& x) {
      for (std::size_t c = 0; c < x.cols(); ++c) {
        double s = 0.0;
        for (std::size_t i = k; i < m; ++i) s += v[i] * x(i, c);
        s = 2.0 * s / vnorm2;
        for (std::size_t i = k; i < m; ++i) x(i, c) -= s * v[i];
      }
    };
    reflect(a);
    reflect(b);
  }
  Matrix x(n, b.cols());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = b(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) s -= a(ii, k) * x(k, c);
      x(ii, c) = s / a(ii, ii);
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Bottom of a PSD spectrum

struct SubspaceOptions {
  std::size_t dense_cutoff = 300;  // at or below this order use full Jacobi
  double tol = 1e-10;              // residual ‖Av − λv‖ relative to ‖A‖_F
  int max_iterations = 500;
  std::uint64_t seed = 0x5EEDULL;
};

// The m algebraically smallest eigenpairs of a symmetric PSD matrix.
// Large inputs use shift-invert block subspace iteration with Rayleigh-Ritz
// extraction; the shift is a small positive multiple of the diagonal scale.
inline EigenResult smallest_eigenpairs(const Matrix& a, std::size_t m,
                                       const SubspaceOptions& opts = {}) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("smallest_eigenpairs: matrix must be square, got " + a.shape());
  }
  const std::size_t n = a.rows();
  if (m == 0 || m > n) {
    throw std::invalid_argument("smallest_eigenpairs: m = " + std::to_string(m) +
                                " out of range [1, " + std::to_string(n) + "]");
  }
  auto truncate = [m](EigenResult full) {
    EigenResult out;
    out.values.assign(full.values.begin(), full.values.begin() + static_cast<std::ptrdiff_t>(m));
    out.vectors = Matrix(full.vectors.rows(), m);
    for (std::size_t i = 0; i < full.vectors.rows(); ++i)
      for (std::size_t j = 0; j < m; ++j) out.vectors(i, j) = full.vectors(i, j);
    return out;
  };
  if (n <= opts.dense_cutoff) return truncate(sym_eig(a));

  const double scale = frobenius_norm(a);
  if (asymmetry(a) > 1e-10 * std::max(scale, 1e-300)) {
    throw std::invalid_argument("smallest_eigenpairs: matrix is not symmetric");
  }
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  double shift = 1e-10 * std::max(max_diag, 1e-300);
  Matrix factor;
  for (int attempt = 0;; ++attempt) {
    factor = a;
    for (std::size_t i = 0; i < n; ++i) factor(i, i) += shift;
    if (cholesky_in_place(factor)) break;
    if (attempt > 12) {
      throw std::runtime_error("smallest_eigenpairs: shifted matrix not positive definite; "
                               "input is not PSD");
    }
    shift *= 10.0;
  }

  const std::size_t block = std::min(n, m + std::max<std::size_t>(m, 8));
  Matrix q(n, block);
  SplitMix64 rng(opts.seed);
  for (double& x : q.data()) x = rng.uniform(-1.0, 1.0);
  orthonormalize_columns(q);

  std::vector<double> col(n);
  double worst = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iterations; ++it) {
    for (std::size_t j = 0; j < block; ++j) {
      for (std::size_t i = 0; i < n; ++i) col[i] = q(i, j);
      cholesky_solve_in_place(factor, col);
      for (std::size_t i = 0; i < n; ++i) q(i, j) = col[i];
    }
    orthonormalize_columns(q);

    // Rayleigh-Ritz on the original matrix.
    const Matrix aq = matmul(a, q);
    Matrix h = matmul_tn(q, aq);
    for (std::size_t i = 0; i < block; ++i)
      for (std::size_t j = i + 1; j < block; ++j) h(i, j) = h(j, i) = 0.5 * (h(i, j) + h(j, i));
    const EigenResult ritz = sym_eig(h);
    q = matmul(q, ritz.vectors);
    const Matrix aq_ritz = matmul(aq, ritz.vectors);

    worst = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double r = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = aq_ritz(i, j) - ritz.values[j] * q(i, j);
        r += d * d;
      }
      worst = std::max(worst, std::sqrt(r));
    }
    if (worst <= opts.tol * scale) {
      EigenResult out;
      out.values.assign(ritz.values.begin(), ritz.values.begin() + static_cast<std::ptrdiff_t>(m));
      out.vectors = Matrix(n, m);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out.vectors(i, j) = q(i, j);
      return out;
    }
  }
  std::ostringstream msg;
  msg << "smallest_eigenpairs: subspace iteration did not converge; residual " << worst
      << " (||A||_F = " << scale << ")";
  throw std::runtime_error(msg.str());
}

// ---------------------------------------------------------------------------
// Exact k-nearest neighbours

// Row i lists the k nearest other rows of `points` by Euclidean distance,
// nearest first, ties broken by lower index.
using NeighborTable = std::vector<std::vector<std::size_t>>;

namespace detail {

inline void knn_rows(const Matrix& points, std::size_t k, std::size_t begin, std::size_t end,
                     NeighborTable& out) {
  const std::size_t n = points.rows();
  std::vector<std::pair<double, std::size_t>> cand;
  cand.reserve(n - 1);
  for (std::size_t i = begin; i < end; ++i) {
    cand.clear();
    const auto pi = points.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.emplace_back(squared_distance(pi, points.row(j)), j);
    }
    auto kth = cand.begin() + static_cast<std::ptrdiff_t>(k);
    std::nth_element(cand.begin(), kth - 1, cand.end());
    std::sort(cand.begin(), kth);
    out[i].resize(k);
    for (std::size_t r = 0; r < k; ++r) out[i][r] = cand[r].second;
  }
}

}  // namespace detail

inline NeighborTable knn(const Matrix& points, std::size_t k, unsigned threads = 1) {
  const std::size_t n = points.rows();
  if (k >= n) {
    throw std::invalid_argument("knn: k = " + std::to_string(k) + " must be < N = " +
                                std::to_string(n));
  }
  NeighborTable out(n);
  if (k == 0) return out;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    detail::knn_rows(points, k, 0, n, out);
    return out;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t b = t * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e] { detail::knn_rows(points, k, b, e, out); });
  }
  return out;
}

// Sizes of the connected components of the symmetrised neighbour graph,
// largest first.
inline std::vector<std::size_t> component_sizes(const NeighborTable& nbrs) {
  const std::size_t n = nbrs.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : nbrs[i]) {
      const std::size_t a = find(i);
      const std::size_t b = find(j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  std::vector<std::size_t> count(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++count[find(i)];
  std::vector<std::size_t> sizes;
  for (std::size_t c : count)
    if (c) sizes.push_back(c);
  std::sort(sizes.rbegin(), sizes.rend());
  return sizes;
}

}  // namespace mgeo
