#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdmm/averaging.hpp"
#include "pdmm/mirror.hpp"
#include "pdmm/objective.hpp"
#include "pdmm/stacked.hpp"

namespace pdmm {

struct SolverConfig {
  double rho = 1.0;
  double tau = 0.5;
  std::vector<double> delta{0.0};  // scalar broadcast or one entry per vertex
  double gamma = 0.25;
  MirrorMap mirror = MirrorMap::negative_entropy();
  MirrorKind prox_kind = MirrorKind::kNegativeEntropy;  // kind of phi_i
  long max_iters = 1000;
  double stop_tol = 0.0;  // stop once the iteration residual drops below this
  std::uint64_t seed = 0;
  bool strict = true;  // enforce the step-size regime the descent proof needs

  double delta_at(int i) const {
    if (delta.size() == 1) return delta[0];
    return delta[static_cast<std::size_t>(i)];
  }

  double delta_max() const {
    double d = 0.0;
    for (double v : delta) d = std::max(d, v);
    return d;
  }

  void validate(int m, int n) const {
    if (!(rho > 0.0)) throw std::invalid_argument("config: rho must be > 0");
    if (!(tau > 0.0)) throw std::invalid_argument("config: tau must be > 0");
    if (delta.size() != 1 && static_cast<int>(delta.size()) != m)
      throw std::invalid_argument("config: delta must be scalar or one per vertex");
    for (double d : delta)
      if (d < 0.0) throw std::invalid_argument("config: delta must be >= 0");
    const double mu_sigma =
        mirror.strong_convexity() * sigma_factor(n, mirror.norm_index());
    if (!(gamma > 0.0) || !(gamma < mu_sigma))
      throw std::invalid_argument("config: gamma must lie in (0, mu*sigma)");
    if (strict && tau > rho * (mu_sigma - gamma) + 1e-15)
      throw std::invalid_argument(
          "config: tau exceeds rho*(mu*sigma - gamma); disable strict mode to "
          "run outside the proven regime");
    if (max_iters < 0) throw std::invalid_argument("config: max_iters");
  }
};

// tau = rho * (mu * sigma - gamma), the largest dual step the descent
// argument supports.
inline double default_step_size(double mu, double p, int n, double rho,
                                double gamma) {
  const double mu_sigma = mu * sigma_factor(n, p);
  if (!(gamma > 0.0) || !(gamma < mu_sigma))
    throw std::invalid_argument("default_step_size: gamma outside (0, mu*sigma)");
  return rho * (mu_sigma - gamma);
}

inline double default_step_size(const MirrorMap& phi, int n, double rho,
                                double gamma) {
  return default_step_size(phi.strong_convexity(), phi.norm_index(), n, rho,
                           gamma);
}

// x: primal blocks, y: mirror average of x, nu: duals, t: iteration count.
struct IterateState {
  StackedPoint x;
  StackedPoint y;
  StackedPoint nu;
  long t = 0;
};

// delta nu_i = nu_i - sum_j P_ij nu_j.
inline std::vector<double> dual_residual_vector(const StackedPoint& nu,
                                                const AveragingMatrix& p,
                                                int i) {
  std::vector<double> out(nu.n);
  detail::accumulate_row(p.rows()[i], nu, out);
  const std::span<const double> nui = nu.block(i);
  for (int k = 0; k < nu.n; ++k) out[k] = nui[k] - out[k];
  return out;
}

namespace detail {

inline void clamp_floor(std::span<double> u) {
  for (auto& v : u)
    if (v < kPositiveFloor) v = kPositiveFloor;
}

// argmin over X of <c + dnu, x> + (rho/2)||x - y||^2 + (delta/2)||x - xp||^2.
inline void linear_sqe_prox(std::span<const double> y,
                            std::span<const double> c,
                            std::span<const double> dnu,
                            std::span<const double> xp, double rho,
                            double delta, const FeasibleSet& x_set,
                            std::span<double> out) {
  const std::size_t n = y.size();
  std::vector<double> v(n);
  if (delta == 0.0) {
    for (std::size_t k = 0; k < n; ++k) v[k] = y[k] - (c[k] + dnu[k]) / rho;
  } else {
    const double denom = rho + delta;
    for (std::size_t k = 0; k < n; ++k)
      v[k] = (rho * y[k] + delta * xp[k] - (c[k] + dnu[k])) / denom;
  }
  if (x_set.kind == FeasibleKind::kProbabilitySimplex) {
    std::vector<double> p = euclidean_simplex_projection(v);
    for (std::size_t k = 0; k < n; ++k) out[k] = p[k];
  } else {
    for (std::size_t k = 0; k < n; ++k) out[k] = v[k];
  }
}

// argmin over X of <c + dnu, x> + rho B(x, y) + delta B(x, xp) under the
// entropy map: a multiplicative update, renormalized on the simplex.
inline void linear_entropy_prox(std::span<const double> y,
                                std::span<const double> c,
                                std::span<const double> dnu,
                                std::span<const double> xp, double rho,
                                double delta, const FeasibleSet& x_set,
                                std::span<double> out) {
  const std::size_t n = y.size();
  if (delta == 0.0) {
    for (std::size_t k = 0; k < n; ++k)
      out[k] = y[k] * std::exp(-(c[k] + dnu[k]) / rho);
  } else {
    const double denom = rho + delta;
    const double a = rho / denom;
    const double b = delta / denom;
    for (std::size_t k = 0; k < n; ++k)
      out[k] = std::pow(y[k], a) * std::pow(xp[k], b) *
               std::exp(-(c[k] + dnu[k]) / denom);
  }
  if (x_set.kind == FeasibleKind::kProbabilitySimplex) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += out[k];
    for (std::size_t k = 0; k < n; ++k) out[k] /= s;
  }
  clamp_floor(out);
}

struct ProxObjective {
  const LocalObjective* f;
  std::span<const double> dnu;
  std::span<const double> y;
  std::span<const double> xp;
  double rho;
  double delta;
  MirrorMap mirror;
  MirrorMap prox_map;

  double value(std::span<const double> x) const {
    double s = f->value(x);
    for (std::size_t k = 0; k < x.size(); ++k) s += dnu[k] * x[k];
    s += rho * bregman_divergence(mirror, x, y);
    if (delta > 0.0) s += delta * bregman_divergence(prox_map, x, xp);
    return s;
  }

  std::vector<double> subgradient(std::span<const double> x) const {
    std::vector<double> g = f->subgradient(x);
    for (std::size_t k = 0; k < x.size(); ++k) g[k] += dnu[k];
    if (mirror.kind == MirrorKind::kNegativeEntropy) {
      for (std::size_t k = 0; k < x.size(); ++k)
        g[k] += rho * (std::log(std::max(x[k], kPositiveFloor)) -
                       std::log(y[k]));
    } else {
      for (std::size_t k = 0; k < x.size(); ++k) g[k] += rho * (x[k] - y[k]);
    }
    if (delta > 0.0) {
      if (prox_map.kind == MirrorKind::kNegativeEntropy) {
        for (std::size_t k = 0; k < x.size(); ++k)
          g[k] += delta * (std::log(std::max(x[k], kPositiveFloor)) -
                           std::log(std::max(xp[k], kPositiveFloor)));
      } else {
        for (std::size_t k = 0; k < x.size(); ++k)
          g[k] += delta * (x[k] - xp[k]);
      }
    }
    return g;
  }
};

inline void project_feasible(const FeasibleSet& x_set, std::span<double> x) {
  if (x_set.kind == FeasibleKind::kProbabilitySimplex) {
    std::vector<double> p = euclidean_simplex_projection(x);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = p[k];
  }
}

// Projected subgradient on the local subproblem, step 1/(rho k), capped at
// 500 inner iterations, early exit when the iterate stalls below 1e-10.
// Returns the best iterate seen.
inline void numeric_prox(const ProxObjective& obj, const FeasibleSet& x_set,
                         std::span<double> out) {
  const std::size_t n = obj.y.size();
  std::vector<double> x(obj.y.begin(), obj.y.end());
  project_feasible(x_set, x);
  std::vector<double> best = x;
  double best_val = obj.value(best);
  for (int k = 1; k <= 500; ++k) {
    std::vector<double> g = obj.subgradient(x);
    const double step = 1.0 / (obj.rho * k);
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) x[i] -= step * g[i];
    project_feasible(x_set, x);
    if (obj.mirror.kind == MirrorKind::kNegativeEntropy) clamp_floor(x);
    const double val = obj.value(x);
    if (!std::isfinite(val))
      throw std::runtime_error("numeric_prox: subproblem diverged");
    if (val < best_val) {
      best_val = val;
      best = x;
    }
    for (std::size_t i = 0; i < n; ++i)
      moved = std::max(moved, std::abs(step * g[i]));
    if (moved < 1e-10) break;
  }
  for (std::size_t k = 0; k < n; ++k) out[k] = best[k];
}

}  // namespace detail

// Local proximal solve for vertex i. Linear costs with a matching proximal
// map use the closed forms; everything else runs the numeric fallback.
inline void solve_local_prox(const LocalObjective& f,
                             std::span<const double> dnu,
                             std::span<const double> y,
                             std::span<const double> x_prev, double rho,
                             double delta_i, const MirrorMap& mirror,
                             MirrorKind prox_kind, const FeasibleSet& x_set,
                             std::span<double> out) {
  if (!(rho > 0.0)) throw std::invalid_argument("solve_local_prox: rho");
  if (delta_i < 0.0) throw std::invalid_argument("solve_local_prox: delta");
  const bool matching = delta_i == 0.0 || prox_kind == mirror.kind;
  if (f.kind == LocalObjective::Kind::kLinear && matching) {
    if (mirror.kind == MirrorKind::kSquaredEuclidean) {
      detail::linear_sqe_prox(y, f.cost, dnu, x_prev, rho, delta_i, x_set, out);
      return;
    }
    detail::linear_entropy_prox(y, f.cost, dnu, x_prev, rho, delta_i, x_set,
                                out);
    return;
  }
  detail::ProxObjective obj{&f,     dnu,     y,      x_prev,
                            rho,    delta_i, mirror, MirrorMap{prox_kind}};
  detail::numeric_prox(obj, x_set, out);
}

inline IterateState make_initial_state(const ProblemInstance& problem,
                                       const AveragingMatrix& p,
                                       const SolverConfig& cfg,
                                       int threads = 1) {
  IterateState s;
  s.x = problem.feasible.kind == FeasibleKind::kProbabilitySimplex
            ? StackedPoint::uniform_simplex(problem.m, problem.n)
            : StackedPoint::zeros(problem.m, problem.n);
  s.nu = StackedPoint::zeros(problem.m, problem.n);
  s.y = mirror_average(p, cfg.mirror, problem.feasible, s.x, threads);
  s.t = 0;
  return s;
}

// One synchronous round of the plain consensus method: every vertex averages
// its neighbors, takes a projected gradient-style step on its local cost, and
// the duals move with step rho. p_x_next, when given, receives P times the
// new primal stack (the dual update computes it anyway).
inline IterateState pdmm_step(const IterateState& state,
                              const ProblemInstance& problem,
                              const AveragingMatrix& p, const SolverConfig& cfg,
                              int threads = 1,
                              StackedPoint* p_x_next = nullptr) {
  const int m = problem.m;
  const int n = problem.n;
  IterateState next;
  next.x = StackedPoint(m, n);
  detail::parallel_blocks(m, threads, [&](int i) {
    std::vector<double> xbar(n);
    detail::accumulate_row(p.rows()[i], state.x, xbar);
    std::vector<double> dnu = dual_residual_vector(state.nu, p, i);
    const LocalObjective& f = problem.objectives[i];
    if (f.kind == LocalObjective::Kind::kLinear) {
      detail::linear_sqe_prox(xbar, f.cost, dnu, state.x.block(i), cfg.rho,
                              0.0, problem.feasible, next.x.block(i));
    } else {
      detail::ProxObjective obj{&f,
                                dnu,
                                xbar,
                                state.x.block(i),
                                cfg.rho,
                                0.0,
                                MirrorMap::squared_euclidean(),
                                MirrorMap::squared_euclidean()};
      detail::numeric_prox(obj, problem.feasible, next.x.block(i));
    }
  });
  StackedPoint px(m, n);
  next.nu = StackedPoint(m, n);
  detail::parallel_blocks(m, threads, [&](int i) {
    detail::accumulate_row(p.rows()[i], next.x, px.block(i));
    const std::span<const double> xi = next.x.block(i);
    const std::span<const double> pxi = px.block(i);
    const std::span<const double> nui = state.nu.block(i);
    std::span<double> out = next.nu.block(i);
    for (int k = 0; k < n; ++k) out[k] = nui[k] + cfg.rho * (xi[k] - pxi[k]);
  });
  next.y = mirror_average(p, cfg.mirror, problem.feasible, next.x, threads);
  next.t = state.t + 1;
  if (p_x_next) *p_x_next = std::move(px);
  return next;
}

// One round of the mirror variant: state.y already holds the mirror average
// of state.x, each vertex solves its local prox against it, and the duals
// move with step tau.
inline IterateState bregman_pdmm_step(const IterateState& state,
                                      const ProblemInstance& problem,
                                      const AveragingMatrix& p,
                                      const SolverConfig& cfg, int threads = 1,
                                      StackedPoint* p_x_next = nullptr) {
  const int m = problem.m;
  const int n = problem.n;
  IterateState next;
  next.x = StackedPoint(m, n);
  detail::parallel_blocks(m, threads, [&](int i) {
    std::vector<double> dnu = dual_residual_vector(state.nu, p, i);
    solve_local_prox(problem.objectives[i], dnu, state.y.block(i),
                     state.x.block(i), cfg.rho, cfg.delta_at(i), cfg.mirror,
                     cfg.prox_kind, problem.feasible, next.x.block(i));
  });
  StackedPoint px(m, n);
  next.nu = StackedPoint(m, n);
  detail::parallel_blocks(m, threads, [&](int i) {
    detail::accumulate_row(p.rows()[i], next.x, px.block(i));
    const std::span<const double> xi = next.x.block(i);
    const std::span<const double> pxi = px.block(i);
    const std::span<const double> nui = state.nu.block(i);
    std::span<double> out = next.nu.block(i);
    for (int k = 0; k < n; ++k) out[k] = nui[k] + cfg.tau * (xi[k] - pxi[k]);
  });
  next.y = mirror_average(p, cfg.mirror, problem.feasible, next.x, threads);
  next.t = state.t + 1;
  if (p_x_next) *p_x_next = std::move(px);
  return next;
}

}  // namespace pdmm
