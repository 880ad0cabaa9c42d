#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdmm/diagnostics.hpp"
#include "pdmm/solver.hpp"

namespace pdmm {

enum class Variant { kEuclid, kBregman };

inline const char* variant_name(Variant v) {
  return v == Variant::kEuclid ? "euclid" : "bregman";
}

// The plain-averaging engine is the mirror engine pinned to the squared
// Euclidean map with dual step rho and no proximal term; runs of that
// variant reinterpret the config accordingly.
inline SolverConfig effective_config(const SolverConfig& cfg, Variant v) {
  if (v == Variant::kBregman) return cfg;
  SolverConfig e = cfg;
  e.mirror = MirrorMap::squared_euclidean();
  e.prox_kind = MirrorKind::kSquaredEuclidean;
  e.tau = cfg.rho;
  e.delta = {0.0};
  e.strict = false;
  return e;
}

struct RunOptions {
  int threads = 1;
  const SaddleCertificate* certificate = nullptr;
  std::optional<double> f_star;
  bool track_ergodic = true;
};

struct RunTrace {
  std::vector<DiagnosticsRecord> records;
  IterateState final_state;
  StackedPoint ergodic;  // mean primal over iterations 1..t_final
  long iterations = 0;
  std::string variant;
  std::string error;  // empty on success; trace holds rows up to the failure

  bool ok() const { return error.empty(); }
};

// Synchronous iteration loop. Stops at max_iters or as soon as the iteration
// residual drops below stop_tol. Emits one diagnostics row per iteration plus
// the initial row, so a trace always has iterations + 1 rows.
inline RunTrace run(const ProblemInstance& problem, const AveragingMatrix& p,
                    const SolverConfig& user_cfg, Variant variant,
                    const RunOptions& opts = {}) {
  problem.validate();
  if (p.size() != problem.m)
    throw std::invalid_argument("run: averaging matrix size mismatch");
  const SolverConfig cfg = effective_config(user_cfg, variant);
  cfg.validate(problem.m, problem.n);

  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed = [&t_start] {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now() - t_start)
        .count();
  };

  RunTrace trace;
  trace.variant = variant_name(variant);
  IterateState state = make_initial_state(problem, p, cfg, opts.threads);

  DiagnosticsRecord rec0;
  rec0.t = 0;
  rec0.consensus_residual = consensus_residual(state.x, p);
  if (opts.f_star)
    rec0.objective_gap = problem.total_value(state.x) - *opts.f_star;
  if (opts.certificate)
    rec0.lyapunov = lyapunov_value(state, *opts.certificate, cfg);
  rec0.wall_nanos = elapsed();
  trace.records.push_back(rec0);

  StackedPoint ergodic_sum(problem.m, problem.n);
  StackedPoint ergodic_psum(problem.m, problem.n);
  std::vector<double> ergodic_block(problem.n);

  try {
    for (long t = 0; t < cfg.max_iters; ++t) {
      StackedPoint px;
      IterateState next =
          variant == Variant::kEuclid
              ? pdmm_step(state, problem, p, cfg, opts.threads, &px)
              : bregman_pdmm_step(state, problem, p, cfg, opts.threads, &px);

      DiagnosticsRecord rec;
      rec.t = next.t;
      rec.consensus_residual = consensus_residual_from_product(next.x, px);
      rec.residual = cfg.gamma * rec.consensus_residual;
      const MirrorMap prox_map{cfg.prox_kind};
      for (int i = 0; i < problem.m; ++i) {
        rec.residual +=
            bregman_divergence(cfg.mirror, next.x.block(i), state.y.block(i));
        const double d = cfg.delta_at(i);
        if (d > 0.0)
          rec.residual += (d / cfg.rho) * bregman_divergence(
                                              prox_map, next.x.block(i),
                                              state.x.block(i));
      }

      if (opts.track_ergodic) {
        const double t_count = static_cast<double>(next.t);
        for (std::size_t k = 0; k < ergodic_sum.data.size(); ++k) {
          ergodic_sum.data[k] += next.x.data[k];
          ergodic_psum.data[k] += px.data[k];
        }
        if (opts.f_star) {
          double val = 0.0;
          for (int i = 0; i < problem.m; ++i) {
            const std::span<const double> si = ergodic_sum.block(i);
            for (int k = 0; k < problem.n; ++k)
              ergodic_block[k] = si[k] / t_count;
            val += problem.objectives[i].value(ergodic_block);
          }
          rec.objective_gap = val - *opts.f_star;
        }
        double s = 0.0;
        for (std::size_t k = 0; k < ergodic_sum.data.size(); ++k) {
          const double d = ergodic_sum.data[k] - ergodic_psum.data[k];
          s += d * d;
        }
        rec.ergodic_consensus = 0.5 * s / (t_count * t_count);
      }

      if (opts.certificate)
        rec.lyapunov = lyapunov_value(next, *opts.certificate, cfg);
      rec.wall_nanos = elapsed();
      trace.records.push_back(rec);

      state = std::move(next);
      trace.iterations = state.t;
      if (rec.residual < cfg.stop_tol) break;
    }
  } catch (const std::exception& e) {
    trace.error = e.what();
  }

  if (opts.track_ergodic && trace.iterations > 0) {
    trace.ergodic = ergodic_sum;
    for (auto& v : trace.ergodic.data)
      v /= static_cast<double>(trace.iterations);
  }
  trace.final_state = std::move(state);
  return trace;
}

}  // namespace pdmm
