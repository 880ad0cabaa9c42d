#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <numeric>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pdmm/averaging.hpp"
#include "pdmm/stacked.hpp"

namespace pdmm {

// Iterates under the entropy map are kept strictly positive by clamping at
// this floor after each multiplicative update, so gradients stay finite.
inline constexpr double kPositiveFloor = 1e-300;

enum class MirrorKind { kSquaredEuclidean, kNegativeEntropy };

// A mirror map is identified by its kind plus the two constants the step-size
// rule needs: the strong-convexity modulus mu (with respect to the l_p norm)
// and the norm index p itself.
struct MirrorMap {
  MirrorKind kind = MirrorKind::kSquaredEuclidean;

  static MirrorMap squared_euclidean() {
    return {MirrorKind::kSquaredEuclidean};
  }
  static MirrorMap negative_entropy() { return {MirrorKind::kNegativeEntropy}; }

  // 0.5 * ||u||_2^2 is 1-strongly convex in l_2; negative entropy is
  // 1-strongly convex in l_1 on the simplex (Pinsker).
  double strong_convexity() const { return 1.0; }

  double norm_index() const {
    return kind == MirrorKind::kNegativeEntropy ? 1.0 : 2.0;
  }
};

// sigma = min{1, n^(2/p - 1)}; the norm-equivalence factor between l_p and
// l_2 on an n-dimensional space.
inline double sigma_factor(int n, double p) {
  if (n < 1) throw std::invalid_argument("sigma_factor: n must be positive");
  if (!(p >= 1.0)) throw std::invalid_argument("sigma_factor: p must be >= 1");
  return std::min(1.0, std::pow(static_cast<double>(n), 2.0 / p - 1.0));
}

enum class FeasibleKind { kFreeSpace, kProbabilitySimplex };

struct FeasibleSet {
  FeasibleKind kind = FeasibleKind::kFreeSpace;
  int n = 0;

  static FeasibleSet free_space(int n) {
    return {FeasibleKind::kFreeSpace, n};
  }
  static FeasibleSet probability_simplex(int n) {
    return {FeasibleKind::kProbabilitySimplex, n};
  }

  bool contains(std::span<const double> u, double tol = 1e-10) const {
    if (static_cast<int>(u.size()) != n) return false;
    if (kind == FeasibleKind::kFreeSpace) return true;
    double s = 0.0;
    for (double v : u) {
      if (v < 0.0) return false;
      s += v;
    }
    return std::abs(s - 1.0) <= tol;
  }
};

inline double phi_value(const MirrorMap& phi, std::span<const double> u) {
  double s = 0.0;
  if (phi.kind == MirrorKind::kSquaredEuclidean) {
    for (double v : u) s += v * v;
    return 0.5 * s;
  }
  for (double v : u) {
    if (v < 0.0)
      throw std::invalid_argument("phi_value: negative coordinate for entropy");
    if (v > 0.0) s += v * std::log(v);
  }
  return s;
}

// Gradient of the mirror map. Entropy requires strictly positive input.
inline void mirror_push(const MirrorMap& phi, std::span<const double> u,
                        std::span<double> out) {
  if (phi.kind == MirrorKind::kSquaredEuclidean) {
    for (std::size_t k = 0; k < u.size(); ++k) out[k] = u[k];
    return;
  }
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!(u[k] > 0.0))
      throw std::invalid_argument(
          "mirror_push: nonpositive coordinate for entropy");
    out[k] = 1.0 + std::log(u[k]);
  }
}

// Inverse of mirror_push.
inline void mirror_pull(const MirrorMap& phi, std::span<const double> theta,
                        std::span<double> out) {
  if (phi.kind == MirrorKind::kSquaredEuclidean) {
    for (std::size_t k = 0; k < theta.size(); ++k) out[k] = theta[k];
    return;
  }
  for (std::size_t k = 0; k < theta.size(); ++k)
    out[k] = std::exp(theta[k] - 1.0);
}

// B_phi(u, v) = phi(u) - phi(v) - <grad phi(v), u - v>. The first argument
// may sit on the boundary of the domain; the second must be interior.
inline double bregman_divergence(const MirrorMap& phi,
                                 std::span<const double> u,
                                 std::span<const double> v) {
  if (u.size() != v.size())
    throw std::invalid_argument("bregman_divergence: size mismatch");
  if (std::memcmp(u.data(), v.data(), u.size() * sizeof(double)) == 0)
    return 0.0;
  double s = 0.0;
  if (phi.kind == MirrorKind::kSquaredEuclidean) {
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double d = u[k] - v[k];
      s += d * d;
    }
    return 0.5 * s;
  }
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!(v[k] > 0.0))
      throw std::invalid_argument(
          "bregman_divergence: second argument outside entropy domain");
    if (u[k] < 0.0)
      throw std::invalid_argument(
          "bregman_divergence: first argument outside domain closure");
    if (u[k] > 0.0) s += u[k] * (std::log(u[k]) - std::log(v[k]));
    s += v[k] - u[k];
  }
  return s;
}

// Euclidean projection onto the probability simplex, sort-and-threshold.
inline std::vector<double> euclidean_simplex_projection(
    std::span<const double> v) {
  const int n = static_cast<int>(v.size());
  if (n == 0)
    throw std::invalid_argument("euclidean_simplex_projection: empty input");
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double csum = 0.0;
  double theta = 0.0;
  int rho = 0;
  for (int j = 0; j < n; ++j) {
    csum += u[j];
    const double t = (csum - 1.0) / (j + 1);
    if (u[j] - t > 0.0) {
      rho = j + 1;
      theta = t;
    }
  }
  (void)rho;
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = std::max(v[k] - theta, 0.0);
  return out;
}

// Bregman projection of a point in the mirror domain onto the feasible set.
inline void bregman_project(const MirrorMap& phi, const FeasibleSet& x_set,
                            std::span<const double> z, std::span<double> out) {
  if (x_set.kind == FeasibleKind::kFreeSpace) {
    for (std::size_t k = 0; k < z.size(); ++k) out[k] = z[k];
    return;
  }
  if (x_set.kind == FeasibleKind::kProbabilitySimplex) {
    if (phi.kind == MirrorKind::kNegativeEntropy) {
      double s = 0.0;
      for (double v : z) {
        if (!(v > 0.0))
          throw std::invalid_argument(
              "bregman_project: entropy projection needs positive input");
        s += v;
      }
      for (std::size_t k = 0; k < z.size(); ++k) out[k] = z[k] / s;
      return;
    }
    std::vector<double> p = euclidean_simplex_projection(z);
    for (std::size_t k = 0; k < z.size(); ++k) out[k] = p[k];
    return;
  }
  throw std::invalid_argument("bregman_project: unsupported pair");
}

namespace detail {

// Runs fn(i) for i in [0, m). With more than one thread the index range is
// split into contiguous chunks; each block is produced by exactly the same
// per-block arithmetic as in the serial order, so results are bit-identical.
template <typename Fn>
void parallel_blocks(int m, int threads, Fn&& fn) {
  if (threads <= 1 || m <= 1) {
    for (int i = 0; i < m; ++i) fn(i);
    return;
  }
  const int nt = std::min(threads, m);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nt);
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    const int lo = static_cast<int>(static_cast<long long>(m) * t / nt);
    const int hi = static_cast<int>(static_cast<long long>(m) * (t + 1) / nt);
    pool.emplace_back([lo, hi, &fn, &errors, t] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// out_block = sum_j P_ij * stack_j, accumulated in ascending j over the
// nonzero entries of row i. Every caller that forms a P-weighted block sum
// goes through here so the arithmetic order is fixed in one place.
inline void accumulate_row(const AveragingMatrix::Row& row,
                           const StackedPoint& stack, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t e = 0; e < row.index.size(); ++e) {
    const double w = row.weight[e];
    const std::span<const double> src = stack.block(row.index[e]);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * src[k];
  }
}

}  // namespace detail

// Blockwise mirror-space averaging: push every block through grad phi, take
// P-weighted sums, pull back, project onto the feasible set.
inline StackedPoint mirror_average(const AveragingMatrix& p,
                                   const MirrorMap& phi,
                                   const FeasibleSet& x_set,
                                   const StackedPoint& x, int threads = 1) {
  if (p.size() != x.m)
    throw std::invalid_argument("mirror_average: size mismatch");
  StackedPoint pushed(x.m, x.n);
  detail::parallel_blocks(x.m, threads, [&](int j) {
    mirror_push(phi, x.block(j), pushed.block(j));
  });
  StackedPoint y(x.m, x.n);
  detail::parallel_blocks(x.m, threads, [&](int i) {
    std::vector<double> theta(x.n);
    std::vector<double> z(x.n);
    detail::accumulate_row(p.rows()[i], pushed, theta);
    mirror_pull(phi, theta, z);
    bregman_project(phi, x_set, z, y.block(i));
  });
  return y;
}

}  // namespace pdmm
