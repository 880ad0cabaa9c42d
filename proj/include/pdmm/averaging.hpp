#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pdmm/graph.hpp"
#include "pdmm/linalg.hpp"

namespace pdmm {

// Symmetric stochastic averaging matrix. Entries are immutable after
// construction; the eigenvalue list (ordered by magnitude) is computed once
// up front so sharing across threads is safe.
class AveragingMatrix {
 public:
  struct Row {
    std::vector<int> index;     // ascending, nonzero entries only
    std::vector<double> weight;
  };

  static AveragingMatrix from_entries(Matrix p) {
    for (int i = 0; i < p.n; ++i)
      for (int j = i + 1; j < p.n; ++j) p.at(j, i) = p.at(i, j);
    AveragingMatrix am;
    am.p_ = std::move(p);
    am.eig_by_magnitude_ = compute_eigenvalues(am.p_);
    am.rows_ = compute_rows(am.p_);
    return am;
  }

  int size() const { return p_.n; }
  double entry(int i, int j) const { return p_.at(i, j); }
  const Matrix& entries() const { return p_; }
  const std::vector<Row>& rows() const { return rows_; }

  const std::vector<double>& eigenvalues_by_magnitude() const {
    return eig_by_magnitude_;
  }

  double lambda2_magnitude() const {
    return p_.n > 1 ? std::abs(eig_by_magnitude_[1]) : 0.0;
  }

 private:
  static std::vector<double> compute_eigenvalues(const Matrix& p) {
    EigenSystem es = jacobi_eigensystem(p);
    std::stable_sort(es.values.begin(), es.values.end(),
                     [](double a, double b) { return std::abs(a) > std::abs(b); });
    return es.values;
  }

  static std::vector<Row> compute_rows(const Matrix& p) {
    std::vector<Row> rows(p.n);
    for (int i = 0; i < p.n; ++i) {
      for (int j = 0; j < p.n; ++j) {
        const double w = p.at(i, j);
        if (w != 0.0) {
          rows[i].index.push_back(j);
          rows[i].weight.push_back(w);
        }
      }
    }
    return rows;
  }

  Matrix p_;
  std::vector<double> eig_by_magnitude_;
  std::vector<Row> rows_;
};

struct Spectrum {
  std::vector<double> eigenvalues;  // ordered by decreasing magnitude
  double lambda2_magnitude;
};

inline Spectrum spectrum(const AveragingMatrix& p) {
  return {p.eigenvalues_by_magnitude(), p.lambda2_magnitude()};
}

// P = I - L / (2 d_max), the standard Laplacian-based averaging weights.
inline AveragingMatrix build_laplacian_averaging(const Graph& g) {
  if (!is_connected(g))
    throw std::invalid_argument("build_laplacian_averaging: disconnected graph");
  const double alpha = 1.0 / (2.0 * g.max_degree());
  Matrix p(g.m);
  for (int i = 0; i < g.m; ++i) p.at(i, i) = 1.0 - alpha * g.degree(i);
  for (const auto& [a, b] : g.edges) {
    p.at(a, b) = alpha;
    p.at(b, a) = alpha;
  }
  return AveragingMatrix::from_entries(std::move(p));
}

struct CheckResult {
  std::string name;
  bool pass = false;
  double magnitude = 0.0;  // size of the worst violation, 0 when clean
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  const CheckResult& check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw std::invalid_argument("no such check: " + name);
  }
};

// Report-only diagnostics; nothing here throws on a bad matrix.
inline ValidationReport validate_averaging(const AveragingMatrix& p,
                                           const Graph& g) {
  const int m = p.size();
  ValidationReport rep;

  double asym = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      asym = std::max(asym, std::abs(p.entry(i, j) - p.entry(j, i)));
  rep.checks.push_back({"symmetry", asym == 0.0, asym});

  double row_err = 0.0;
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += p.entry(i, j);
    row_err = std::max(row_err, std::abs(s - 1.0));
  }
  rep.checks.push_back({"row_sums", row_err <= 1e-12, row_err});

  double most_negative = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      most_negative = std::max(most_negative, -p.entry(i, j));
  rep.checks.push_back({"nonnegative", most_negative <= 0.0, most_negative});

  double off_support = 0.0;
  if (g.m == m) {
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (p.entry(i, j) > 0.0 && !g.has_edge(i, j))
          off_support = std::max(off_support, p.entry(i, j));
    rep.checks.push_back({"support", off_support == 0.0, off_support});
  } else {
    rep.checks.push_back({"support", false, 0.0});
  }

  const auto& eigs = p.eigenvalues_by_magnitude();
  double min_eig = eigs.empty() ? 0.0 : eigs[0];
  for (double e : eigs) min_eig = std::min(min_eig, e);
  rep.checks.push_back(
      {"psd", min_eig >= -1e-10, std::max(0.0, -min_eig)});

  // Irreducibility: the graph of strictly positive off-diagonal entries must
  // be connected.
  std::vector<char> seen(m, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int a = stack.back();
    stack.pop_back();
    for (int b = 0; b < m; ++b) {
      if (b != a && !seen[b] && p.entry(a, b) > 0.0) {
        seen[b] = 1;
        ++reached;
        stack.push_back(b);
      }
    }
  }
  rep.checks.push_back({"irreducible", reached == m,
                        static_cast<double>(m - reached)});

  const double lambda1_err =
      eigs.empty() ? 1.0 : std::abs(std::abs(eigs[0]) - 1.0);
  rep.checks.push_back({"lambda1", lambda1_err <= 1e-10, lambda1_err});

  const double l2 = p.lambda2_magnitude();
  rep.checks.push_back({"spectral_gap", l2 < 1.0 - 1e-12, l2});

  return rep;
}

namespace detail {

inline Matrix matrix_from_edge_weights(const Graph& g,
                                       const std::vector<double>& w) {
  Matrix p(g.m);
  std::vector<double> row_sum(g.m, 0.0);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& [a, b] = g.edges[e];
    p.at(a, b) = w[e];
    p.at(b, a) = w[e];
    row_sum[a] += w[e];
    row_sum[b] += w[e];
  }
  for (int i = 0; i < g.m; ++i) p.at(i, i) = 1.0 - row_sum[i];
  return p;
}

inline Matrix half_mix_with_identity(const Matrix& p) {
  Matrix out(p.n);
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j)
      out.at(i, j) = 0.5 * (p.at(i, j) + (i == j ? 1.0 : 0.0));
  return out;
}

}  // namespace detail

// Minimizes |lambda_2| over symmetric edge weights by projected subgradient
// on max(lambda_2, -lambda_min). The subgradient of an extreme eigenvalue in
// the weight of edge (a, b) is +/-(v_a - v_b)^2 for the matching eigenvector
// v. Projection clips weights at zero, then shrinks both endpoints of any row
// whose weight mass exceeds one so the diagonal stays nonnegative. Candidates
// that are not PSD take the (P + I) / 2 fix; an already-PSD candidate is kept
// as is. The best valid candidate seen is returned, starting from the
// Laplacian construction, so the result never loses to it.
inline AveragingMatrix optimize_averaging_matrix(const Graph& g, int iters) {
  if (iters < 0) throw std::invalid_argument("optimize_averaging_matrix: iters");
  AveragingMatrix best = build_laplacian_averaging(g);
  double best_l2 = best.lambda2_magnitude();

  const std::size_t ne = g.edges.size();
  const double alpha0 = 1.0 / (2.0 * g.max_degree());
  std::vector<double> w(ne, alpha0);
  const double step0 = 1.0 / (2.0 * g.max_degree());

  for (int k = 0; k < iters; ++k) {
    Matrix cand = detail::matrix_from_edge_weights(g, w);
    EigenSystem es = jacobi_eigensystem(cand);
    std::vector<int> ord = order_descending(es.values);
    const double lam2 = es.values[ord[1]];
    const double lam_min = es.values[ord[g.m - 1]];
    const bool psd = lam_min >= -1e-10;

    // Magnitude of the second eigenvalue after the PSD fix, if one is needed.
    double cand_l2;
    if (psd)
      cand_l2 = std::max(std::abs(lam2), std::abs(lam_min));
    else
      cand_l2 = std::max(std::abs((lam2 + 1.0) / 2.0),
                         std::abs((lam_min + 1.0) / 2.0));

    if (cand_l2 < best_l2) {
      Matrix fixed = psd ? cand : detail::half_mix_with_identity(cand);
      AveragingMatrix am = AveragingMatrix::from_entries(std::move(fixed));
      if (validate_averaging(am, g).ok() && am.lambda2_magnitude() < best_l2) {
        best_l2 = am.lambda2_magnitude();
        best = std::move(am);
      }
    }

    // Subgradient step on the active extreme eigenvalue.
    const bool second_active = lam2 >= -lam_min;
    const int col = second_active ? ord[1] : ord[g.m - 1];
    const double sign = second_active ? -1.0 : 1.0;
    const double step = step0 / std::sqrt(static_cast<double>(k) + 1.0);
    for (std::size_t e = 0; e < ne; ++e) {
      const auto& [a, b] = g.edges[e];
      const double d = es.vectors.at(a, col) - es.vectors.at(b, col);
      w[e] -= step * sign * d * d;
      if (w[e] < 0.0) w[e] = 0.0;
    }
    std::vector<double> row_sum(g.m, 0.0);
    for (std::size_t e = 0; e < ne; ++e) {
      const auto& [a, b] = g.edges[e];
      row_sum[a] += w[e];
      row_sum[b] += w[e];
    }
    std::vector<double> scale(g.m, 1.0);
    for (int i = 0; i < g.m; ++i)
      if (row_sum[i] > 1.0) scale[i] = 1.0 / row_sum[i];
    for (std::size_t e = 0; e < ne; ++e) {
      const auto& [a, b] = g.edges[e];
      w[e] *= std::min(scale[a], scale[b]);
    }
  }
  return best;
}

}  // namespace pdmm
