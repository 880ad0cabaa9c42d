#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace pdmm {

// Dense square matrix, row major. Only the handful of operations the
// averaging-matrix code needs.
struct Matrix {
  int n = 0;
  std::vector<double> a;

  Matrix() = default;
  explicit Matrix(int n_) : n(n_), a(static_cast<std::size_t>(n_) * n_, 0.0) {}

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const {
    return a[static_cast<std::size_t>(i) * n + j];
  }

  static Matrix identity(int n) {
    Matrix m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  std::vector<double> multiply(const std::vector<double>& v) const {
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += at(i, j) * v[j];
      out[i] = acc;
    }
    return out;
  }
};

struct EigenSystem {
  std::vector<double> values;  // values[k] pairs with column k of vectors
  Matrix vectors;
};

inline double off_diagonal_norm(const Matrix& m) {
  double s = 0.0;
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j)
      if (i != j) s += m.at(i, j) * m.at(i, j);
  return std::sqrt(s);
}

// Cyclic Jacobi for symmetric matrices. Sweeps rotate every (p, q) pair until
// the off-diagonal norm drops below tol.
inline EigenSystem jacobi_eigensystem(Matrix m, double tol = 1e-12,
                                      int max_sweeps = 100) {
  const int n = m.n;
  Matrix v = Matrix::identity(n);
  if (n == 1) return {{m.at(0, 0)}, v};
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm(m) <= tol) {
      EigenSystem es;
      es.values.resize(n);
      for (int i = 0; i < n; ++i) es.values[i] = m.at(i, i);
      es.vectors = std::move(v);
      return es;
    }
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m.at(p, q);
        if (std::abs(apq) < 1e-300) {
          m.at(p, q) = m.at(q, p) = 0.0;
          continue;
        }
        const double theta = (m.at(q, q) - m.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        m.at(p, p) -= t * apq;
        m.at(q, q) += t * apq;
        m.at(p, q) = m.at(q, p) = 0.0;
        for (int i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = m.at(i, p);
          const double aiq = m.at(i, q);
          m.at(i, p) = m.at(p, i) = c * aip - s * aiq;
          m.at(i, q) = m.at(q, i) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = v.at(i, p);
          const double viq = v.at(i, q);
          v.at(i, p) = c * vip - s * viq;
          v.at(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  if (off_diagonal_norm(m) > tol)
    throw std::runtime_error("jacobi_eigensystem: no convergence, input is "
                             "likely malformed");
  EigenSystem es;
  es.values.resize(n);
  for (int i = 0; i < n; ++i) es.values[i] = m.at(i, i);
  es.vectors = std::move(v);
  return es;
}

// Indices that would sort eigenvalues descending by signed value.
inline std::vector<int> order_descending(const std::vector<double>& values) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return values[a] > values[b]; });
  return idx;
}

}  // namespace pdmm
