#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdmm/averaging.hpp"
#include "pdmm/linalg.hpp"
#include "pdmm/objective.hpp"
#include "pdmm/solver.hpp"
#include "pdmm/stacked.hpp"

namespace pdmm {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// One row of a run trace. NaN marks a field that does not apply (no
// certificate, or the t = 0 row which precedes any step).
struct DiagnosticsRecord {
  long t = 0;
  double objective_gap = kMissing;       // on the running ergodic average
  double consensus_residual = kMissing;  // of the current iterate
  double residual = kMissing;            // iteration residual R
  double lyapunov = kMissing;            // V against the attached certificate
  double ergodic_consensus = kMissing;   // not serialized, kept for analysis
  std::int64_t wall_nanos = 0;
};

// (1/2) sum_i ||x_i - sum_j P_ij x_j||^2, given the precomputed product Px.
inline double consensus_residual_from_product(const StackedPoint& x,
                                              const StackedPoint& px) {
  double s = 0.0;
  for (int i = 0; i < x.m; ++i) {
    const std::span<const double> xi = x.block(i);
    const std::span<const double> pxi = px.block(i);
    for (int k = 0; k < x.n; ++k) {
      const double d = xi[k] - pxi[k];
      s += d * d;
    }
  }
  return 0.5 * s;
}

inline double consensus_residual(const StackedPoint& x,
                                 const AveragingMatrix& p) {
  StackedPoint px(x.m, x.n);
  for (int i = 0; i < x.m; ++i)
    detail::accumulate_row(p.rows()[i], x, px.block(i));
  return consensus_residual_from_product(x, px);
}

// Iteration residual R(t+1) between two consecutive states: weighted
// disagreement of the new primal plus the Bregman distance travelled from
// the previous round's mirror average and, with delta > 0, from the previous
// primal.
inline double optimality_residual(const IterateState& prev,
                                  const IterateState& next,
                                  const AveragingMatrix& p,
                                  const SolverConfig& cfg) {
  double r = cfg.gamma * consensus_residual(next.x, p);
  const MirrorMap prox_map{cfg.prox_kind};
  for (int i = 0; i < next.x.m; ++i) {
    r += bregman_divergence(cfg.mirror, next.x.block(i), prev.y.block(i));
    const double d = cfg.delta_at(i);
    if (d > 0.0)
      r += (d / cfg.rho) *
           bregman_divergence(prox_map, next.x.block(i), prev.x.block(i));
  }
  return r;
}

// A consensual primal point, duals, and normal-cone elements certifying
// optimality; residual_kkt bounds how far the stationarity equations are
// from holding exactly.
struct SaddleCertificate {
  StackedPoint x_star;
  StackedPoint nu_star;
  StackedPoint g;
  double residual_kkt = 0.0;
};

// V(t): scaled dual distance plus Bregman distances from the saddle point.
inline double lyapunov_value(const IterateState& state,
                             const SaddleCertificate& cert,
                             const SolverConfig& cfg) {
  double v = 0.0;
  for (std::size_t k = 0; k < state.nu.data.size(); ++k) {
    const double d = cert.nu_star.data[k] - state.nu.data[k];
    v += d * d;
  }
  v /= 2.0 * cfg.tau * cfg.rho;
  const MirrorMap prox_map{cfg.prox_kind};
  for (int i = 0; i < state.x.m; ++i) {
    v += bregman_divergence(cfg.mirror, cert.x_star.block(i),
                            state.y.block(i));
    const double d = cfg.delta_at(i);
    if (d > 0.0)
      v += (d / cfg.rho) * bregman_divergence(prox_map, cert.x_star.block(i),
                                              state.x.block(i));
  }
  return v;
}

// Mean of the first t_count entries of a primal iterate history.
inline StackedPoint ergodic_average(const std::vector<StackedPoint>& iterates,
                                    int t_count) {
  if (t_count < 1 || t_count > static_cast<int>(iterates.size()))
    throw std::invalid_argument("ergodic_average: bad prefix length");
  StackedPoint out(iterates[0].m, iterates[0].n);
  for (int t = 0; t < t_count; ++t)
    for (std::size_t k = 0; k < out.data.size(); ++k)
      out.data[k] += iterates[t].data[k];
  for (auto& v : out.data) v /= t_count;
  return out;
}

struct ReferenceSolution {
  double f_star = 0.0;
  std::vector<double> x_block;  // one shared block, repeated across vertices
};

// Central solve of the consensus problem. Linear costs over the simplex have
// a vertex solution: the coordinate minimizing the summed cost, smallest
// index on ties. Anything else runs projected subgradient on the summed
// objective.
inline ReferenceSolution reference_solution(const ProblemInstance& problem) {
  problem.validate();
  const int n = problem.n;
  if (problem.all_linear() &&
      problem.feasible.kind == FeasibleKind::kProbabilitySimplex) {
    std::vector<double> total(n, 0.0);
    for (const auto& f : problem.objectives)
      for (int k = 0; k < n; ++k) total[k] += f.cost[k];
    int k_star = 0;
    for (int k = 1; k < n; ++k)
      if (total[k] < total[k_star]) k_star = k;
    ReferenceSolution ref;
    ref.f_star = total[k_star];
    ref.x_block.assign(n, 0.0);
    ref.x_block[k_star] = 1.0;
    return ref;
  }
  std::vector<double> u(n, 0.0);
  if (problem.feasible.kind == FeasibleKind::kProbabilitySimplex)
    u.assign(n, 1.0 / n);
  std::vector<double> best = u;
  double best_val = problem.value_at_common(u);
  for (int k = 1; k <= 10000; ++k) {
    std::vector<double> g(n, 0.0);
    for (const auto& f : problem.objectives) {
      std::vector<double> gi = f.subgradient(u);
      for (int j = 0; j < n; ++j) g[j] += gi[j];
    }
    const double step = 1.0 / k;
    for (int j = 0; j < n; ++j) u[j] -= step * g[j];
    detail::project_feasible(problem.feasible, u);
    const double val = problem.value_at_common(u);
    if (val < best_val) {
      best_val = val;
      best = u;
    }
  }
  return {best_val, best};
}

// Builds a saddle certificate for linear costs over the simplex at the
// vertex solution x_star. The normal-cone element is g_i = -(1/m) sum_j c_j
// for every vertex; the dual stationarity system (P - I) nu = c + g is
// solved per coordinate through the eigen-decomposition pseudoinverse,
// dropping eigenvalue directions within 1e-10 of 1 (the consensus kernel).
inline SaddleCertificate certificate_search(const ProblemInstance& problem,
                                            const AveragingMatrix& p,
                                            std::span<const double> x_star) {
  problem.validate();
  if (!problem.all_linear() ||
      problem.feasible.kind != FeasibleKind::kProbabilitySimplex)
    throw std::invalid_argument(
        "certificate_search: needs linear costs over the simplex");
  const int m = problem.m;
  const int n = problem.n;
  if (p.size() != m)
    throw std::invalid_argument("certificate_search: size mismatch");

  std::vector<double> gvec(n, 0.0);
  for (const auto& f : problem.objectives)
    for (int k = 0; k < n; ++k) gvec[k] += f.cost[k];
  for (int k = 0; k < n; ++k) gvec[k] = -gvec[k] / m;

  EigenSystem es = jacobi_eigensystem(p.entries());
  SaddleCertificate cert;
  cert.x_star = StackedPoint::repeated(m, x_star);
  cert.g = StackedPoint::repeated(m, gvec);
  cert.nu_star = StackedPoint(m, n);

  std::vector<double> rhs(m), coef(m);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < m; ++i) rhs[i] = problem.objectives[i].cost[k] + gvec[k];
    for (int e = 0; e < m; ++e) {
      const double lam = es.values[e];
      if (std::abs(lam - 1.0) < 1e-10) {
        coef[e] = 0.0;
        continue;
      }
      double dot = 0.0;
      for (int i = 0; i < m; ++i) dot += es.vectors.at(i, e) * rhs[i];
      coef[e] = dot / (lam - 1.0);
    }
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int e = 0; e < m; ++e) s += es.vectors.at(i, e) * coef[e];
      cert.nu_star.block(i)[k] = s;
    }
  }

  double resid = 0.0;
  for (int i = 0; i < m; ++i) {
    std::vector<double> pnui(n);
    detail::accumulate_row(p.rows()[i], cert.nu_star, pnui);
    for (int k = 0; k < n; ++k) {
      const double lhs = pnui[k] - cert.nu_star.block(i)[k];
      resid = std::max(resid, std::abs(lhs - (problem.objectives[i].cost[k] +
                                              gvec[k])));
    }
  }
  cert.residual_kkt = resid;
  if (resid > 1e-8)
    throw std::runtime_error(
        "certificate_search: stationarity residual too large; point is "
        "likely not optimal");
  return cert;
}

inline double max_squared_cost_norm(const ProblemInstance& problem) {
  double m0 = 0.0;
  for (const auto& f : problem.objectives) {
    if (f.kind != LocalObjective::Kind::kLinear)
      throw std::invalid_argument("max_squared_cost_norm: linear costs only");
    double s = 0.0;
    for (double c : f.cost) s += c * c;
    m0 = std::max(m0, s);
  }
  return m0;
}

struct RateBounds {
  double objective_from_initial;   // (rho B0 + D0) / T
  double consensus_from_initial;   // V(0) / (gamma T)
  double objective_closed_form;    // m (rho + delta_max) ln(n) / T
  double consensus_closed_form;    // spectral-gap form, needs M0 and lambda2
};

// Evaluates the a-priori decay bounds at horizon t_count for a run started
// from `initial` with zero duals.
inline RateBounds rate_bounds(const SaddleCertificate& cert,
                              const IterateState& initial,
                              const SolverConfig& cfg, long t_count, int m,
                              int n, double m0, double lambda2) {
  if (t_count < 1) throw std::invalid_argument("rate_bounds: t_count");
  const double t = static_cast<double>(t_count);
  const MirrorMap prox_map{cfg.prox_kind};
  double b0 = 0.0;
  double d0 = 0.0;
  for (int i = 0; i < m; ++i) {
    b0 += bregman_divergence(cfg.mirror, cert.x_star.block(i),
                             initial.y.block(i));
    const double d = cfg.delta_at(i);
    if (d > 0.0)
      d0 += d * bregman_divergence(prox_map, cert.x_star.block(i),
                                   initial.x.block(i));
  }
  RateBounds rb;
  rb.objective_from_initial = (cfg.rho * b0 + d0) / t;
  rb.consensus_from_initial = lyapunov_value(initial, cert, cfg) /
                              (cfg.gamma * t);
  const double dmax = cfg.delta_max();
  rb.objective_closed_form = m * (cfg.rho + dmax) * std::log(n) / t;
  const double gap = 1.0 - lambda2;
  rb.consensus_closed_form =
      4.0 * m * m0 / (cfg.rho * cfg.rho * gap * gap * t) +
      4.0 * m * (cfg.rho + dmax) * std::log(n) / (cfg.rho * t);
  return rb;
}

}  // namespace pdmm
