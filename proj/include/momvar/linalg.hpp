#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace momvar {

// Dense helpers for the small (<= 8x8) systems in the GMM machinery.
using Matrix = std::vector<std::vector<double>>;

inline Matrix zeros(std::size_t rows, std::size_t cols) {
  return Matrix(rows, std::vector<double>(cols, 0.0));
}

inline Matrix identity(std::size_t n) {
  Matrix m = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

inline Matrix transpose(const Matrix& a) {
  if (a.empty()) return {};
  Matrix t = zeros(a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix c = zeros(a.size(), b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k) {
      const double aik = a[i][k];
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += aik * b[k][j];
    }
  return c;
}

inline std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  return y;
}

inline double quad_form(const Matrix& w, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) s += x[i] * w[i][j] * x[j];
  return s;
}

// Lower-triangular Cholesky factor of a symmetric matrix; returns false
// when a pivot is not strictly positive (matrix not PD).
inline bool cholesky(const Matrix& a, Matrix* l_out) {
  const std::size_t n = a.size();
  Matrix l = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (i == j) {
        if (!(s > 0.0)) return false;
        l[i][j] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  *l_out = l;
  return true;
}

inline std::vector<double> forward_solve(const Matrix& l,
                                         const std::vector<double>& b) {
  const std::size_t n = b.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i][k] * y[k];
    y[i] = s / l[i][i];
  }
  return y;
}

inline std::vector<double> backward_solve_t(const Matrix& l,
                                            const std::vector<double>& b) {
  // solves L^T x = b for lower-triangular L
  const std::size_t n = b.size();
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l[k][ii] * x[k];
    x[ii] = s / l[ii][ii];
  }
  return x;
}

// Gauss-Jordan inverse with partial pivoting. Returns false when a pivot
// degenerates (relative to the largest row entry).
inline bool invert(const Matrix& a, Matrix* out) {
  const std::size_t n = a.size();
  Matrix m = a;
  Matrix inv = identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    double scale = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      scale = std::max(scale, std::fabs(m[piv][j]));
    if (!(std::fabs(m[piv][col]) > 1e-14 * std::max(scale, 1e-300)))
      return false;
    std::swap(m[piv], m[col]);
    std::swap(inv[piv], inv[col]);
    const double d = m[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      m[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = m[r][col];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        m[r][j] -= factor * m[col][j];
        inv[r][j] -= factor * inv[col][j];
      }
    }
  }
  *out = inv;
  return true;
}

}  // namespace momvar
