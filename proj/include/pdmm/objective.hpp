#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pdmm/mirror.hpp"
#include "pdmm/stacked.hpp"

namespace pdmm {

// Per-vertex cost. Linear costs carry their gradient explicitly and unlock
// the closed-form local solves; anything else goes through a value plus
// subgradient oracle and the numeric fallback.
struct LocalObjective {
  enum class Kind { kLinear, kOracle };

  Kind kind = Kind::kLinear;
  std::vector<double> cost;
  std::function<double(std::span<const double>)> value_fn;
  std::function<std::vector<double>(std::span<const double>)> subgradient_fn;

  static LocalObjective linear(std::vector<double> c) {
    LocalObjective f;
    f.kind = Kind::kLinear;
    f.cost = std::move(c);
    return f;
  }

  static LocalObjective oracle(
      std::function<double(std::span<const double>)> value,
      std::function<std::vector<double>(std::span<const double>)> subgradient) {
    if (!value || !subgradient)
      throw std::invalid_argument("oracle objective needs both callbacks");
    LocalObjective f;
    f.kind = Kind::kOracle;
    f.value_fn = std::move(value);
    f.subgradient_fn = std::move(subgradient);
    return f;
  }

  double value(std::span<const double> u) const {
    if (kind == Kind::kLinear) {
      double s = 0.0;
      for (std::size_t k = 0; k < u.size(); ++k) s += cost[k] * u[k];
      return s;
    }
    return value_fn(u);
  }

  std::vector<double> subgradient(std::span<const double> u) const {
    if (kind == Kind::kLinear) return cost;
    return subgradient_fn(u);
  }
};

struct ProblemInstance {
  int m = 0;
  int n = 0;
  std::vector<LocalObjective> objectives;
  FeasibleSet feasible;

  void validate() const {
    if (m < 1) throw std::invalid_argument("problem: m must be positive");
    if (n < 1) throw std::invalid_argument("problem: n must be positive");
    if (static_cast<int>(objectives.size()) != m)
      throw std::invalid_argument("problem: one objective per vertex");
    if (feasible.n != n)
      throw std::invalid_argument("problem: feasible set dimension mismatch");
    for (const auto& f : objectives)
      if (f.kind == LocalObjective::Kind::kLinear &&
          static_cast<int>(f.cost.size()) != n)
        throw std::invalid_argument("problem: cost dimension mismatch");
  }

  bool all_linear() const {
    for (const auto& f : objectives)
      if (f.kind != LocalObjective::Kind::kLinear) return false;
    return true;
  }

  double total_value(const StackedPoint& x) const {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += objectives[i].value(x.block(i));
    return s;
  }

  // Sum of all local costs evaluated at one shared point.
  double value_at_common(std::span<const double> u) const {
    double s = 0.0;
    for (const auto& f : objectives) s += f.value(u);
    return s;
  }
};

}  // namespace pdmm
