#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "ptngarch/params.hpp"

namespace ptngarch {

// Dense linear algebra for the fixed 5-parameter model and the s×s Wald
// quadratic form (s ≤ 5). No general solver dependency.

using Vec5 = Theta;
using Mat5 = std::array<std::array<double, 5>, 5>;

/// Row-major dense matrix for the handful of small shapes used here.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Matrix from(const Mat5& m) {
    Matrix out(5, 5);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) out(i, j) = m[i][j];
    }
    return out;
  }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix out(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < out.rows_; ++i) {
      for (std::size_t j = 0; j < out.cols_; ++j) out(i, j) = rows[i].at(j);
    }
    return out;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    }
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    }
    return c;
  }

  std::vector<double> operator*(const std::vector<double>& x) const {
    std::vector<double> y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) y[i] += (*this)(i, j) * x[j];
    }
    return y;
  }

  Matrix& operator*=(double s) {
    for (auto& v : a_) v *= s;
    return *this;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

/// LDLᵀ factorization of a symmetric matrix without pivoting. Every pivot is
/// recorded so a failure can name the weakest coordinate instead of just
/// reporting "singular".
struct Cholesky {
  Matrix lower;               // unit lower triangle
  std::vector<double> pivots;  // D
  bool ok = false;
  std::size_t weakest = 0;     // index of the smallest relative pivot

  /// Pivot k is rejected when D_k ≤ tol · max_j |A_jj|.
  static Cholesky factor(const Matrix& a, double tol) {
    const std::size_t n = a.rows();
    Cholesky c;
    c.lower = Matrix(n, n);
    c.pivots.assign(n, 0.0);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
    const double floor = tol * (scale > 0.0 ? scale : 1.0);
    c.ok = true;
    double smallest = INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      double d = a(j, j);
      for (std::size_t k = 0; k < j; ++k) d -= c.lower(j, k) * c.lower(j, k) * c.pivots[k];
      c.pivots[j] = d;
      c.lower(j, j) = 1.0;
      if (d < smallest) {
        smallest = d;
        c.weakest = j;
      }
      if (!(d > floor)) {
        c.ok = false;
        continue;  // keep going so every pivot is reported
      }
      for (std::size_t i = j + 1; i < n; ++i) {
        double v = a(i, j);
        for (std::size_t k = 0; k < j; ++k) v -= c.lower(i, k) * c.lower(j, k) * c.pivots[k];
        c.lower(i, j) = v / d;
      }
    }
    return c;
  }

  std::vector<double> solve(std::vector<double> b) const {
    const std::size_t n = pivots.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < i; ++k) b[i] -= lower(i, k) * b[k];
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= pivots[i];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t k = i + 1; k < n; ++k) b[i] -= lower(k, i) * b[k];
    }
    return b;
  }

  Matrix inverse() const {
    const std::size_t n = pivots.size();
    Matrix inv(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> e(n, 0.0);
      e[j] = 1.0;
      const auto col = solve(std::move(e));
      for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    // symmetrize away round-off
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double m = 0.5 * (inv(i, j) + inv(j, i));
        inv(i, j) = inv(j, i) = m;
      }
    }
    return inv;
  }
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
inline std::vector<double> symmetric_eigenvalues(Matrix a) {
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace ptngarch
