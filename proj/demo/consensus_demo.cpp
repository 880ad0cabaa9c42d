#include <iostream>

#include <pdmm/pdmm.hpp>

// Small end to end run: one random instance, both update rules, and the
// iteration counts needed to drive the consensus residual down.

int main() {
  pdmm::ExperimentConfig cfg;
  cfg.m = 8;
  cfg.n = 20;
  cfg.p_edge = 0.5;
  cfg.seed = 7;
  cfg.solver.max_iters = 500;

  pdmm::ExperimentResult res = pdmm::run_experiment(cfg);
  std::cout << "m=" << cfg.m << " n=" << cfg.n
            << " lambda2=" << pdmm::fmt10(res.p.lambda2_magnitude())
            << " f*=" << pdmm::fmt10(res.reference.f_star) << "\n";
  for (const auto& o : res.outcomes) {
    const auto& last = o.trace.records.back();
    std::cout << pdmm::variant_name(o.variant) << ": " << o.trace.iterations
              << " iters, gap=" << pdmm::fmt10(last.objective_gap)
              << ", consensus=" << pdmm::fmt10(last.consensus_residual)
              << ", to 1e-4 at t="
              << pdmm::first_consensus_at_or_below(o.trace.records, 1e-4)
              << "\n";
    if (!o.trace.ok()) {
      std::cerr << "run failed: " << o.trace.error << "\n";
      return 2;
    }
  }
  return 0;
}
