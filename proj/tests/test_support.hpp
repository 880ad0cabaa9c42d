#pragma once

// Independent reference implementations the tests check the library against.
// Everything here is written from raw definitions on purpose; none of it
// calls back into the code under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Fn = std::function<double(const Vec&)>;
using GradFn = std::function<Vec(const Vec&)>;

inline bool connected_bfs(int m, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(m);
  for (auto [i, j] : edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<char> seen(m, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        q.push(w);
      }
  }
  return count == m;
}

inline double kl(const Vec& u, const Vec& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k)
    if (u[k] > 0.0) s += u[k] * std::log(u[k] / v[k]);
  return s;
}

// Closed-form eigenvalues of a symmetric 3x3 matrix via the trigonometric
// solution of the characteristic cubic. Returned in descending order.
inline std::array<double, 3> sym3_eigenvalues(const std::array<std::array<double, 3>, 3>& a) {
  const double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
  std::array<double, 3> eig;
  if (p1 == 0.0) {
    eig = {a[0][0], a[1][1], a[2][2]};
    std::sort(eig.begin(), eig.end(), std::greater<>());
    return eig;
  }
  const double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
  const double p2 = (a[0][0] - q) * (a[0][0] - q) + (a[1][1] - q) * (a[1][1] - q) +
                    (a[2][2] - q) * (a[2][2] - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  std::array<std::array<double, 3>, 3> b;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      b[i][j] = (a[i][j] - (i == j ? q : 0.0)) / p;
  const double detb =
      b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
      b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
      b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
  const double r = std::clamp(detb / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  eig[0] = q + 2.0 * p * std::cos(phi);
  eig[2] = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  eig[1] = 3.0 * q - eig[0] - eig[2];
  return eig;
}

// Simplex projection by bisection on the threshold (independent of the
// library's sort-and-threshold version).
inline Vec project_simplex_bisect(const Vec& v) {
  double lo = *std::max_element(v.begin(), v.end()) - 1.0;
  double hi = *std::max_element(v.begin(), v.end());
  for (int it = 0; it < 200; ++it) {
    const double theta = 0.5 * (lo + hi);
    double s = 0.0;
    for (double vk : v) s += std::max(vk - theta, 0.0);
    (s > 1.0 ? lo : hi) = theta;
  }
  const double theta = 0.5 * (lo + hi);
  Vec x(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) x[k] = std::max(v[k] - theta, 0.0);
  double s = 0.0;
  for (double xk : x) s += xk;
  for (double& xk : x) xk /= s;
  return x;
}

// Brute-force minimization over the probability simplex on a multi-level
// grid. Supports n = 2 and n = 3, which covers the frozen example values.
inline Vec simplex_grid_min(int n, const Fn& f) {
  if (n != 2 && n != 3) throw std::invalid_argument("grid oracle: n must be 2 or 3");
  double c1 = 1.0 / n, c2 = 1.0 / n;
  double width = 1.0;
  Vec best;
  double best_val = std::numeric_limits<double>::infinity();
  for (int level = 0; level < 6; ++level) {
    const int steps = 60;
    const double h = width / steps;
    for (int i = 0; i <= 2 * steps; ++i) {
      const double x1 = c1 + (i - steps) * h;
      if (x1 < 0.0 || x1 > 1.0) continue;
      if (n == 2) {
        const Vec x{x1, 1.0 - x1};
        const double val = f(x);
        if (val < best_val) {
          best_val = val;
          best = x;
        }
        continue;
      }
      for (int j = 0; j <= 2 * steps; ++j) {
        const double x2 = c2 + (j - steps) * h;
        if (x2 < 0.0 || x1 + x2 > 1.0) continue;
        const Vec x{x1, x2, 1.0 - x1 - x2};
        const double val = f(x);
        if (val < best_val) {
          best_val = val;
          best = x;
        }
      }
    }
    c1 = best[0];
    if (n == 3) c2 = best[1];
    width = 4.0 * h;
  }
  return best;
}

// Projected gradient with Armijo backtracking over the simplex. Used as the
// numeric argmin oracle for the local subproblems (strongly convex, smooth
// in the interior), entirely separate from the solver's own machinery.
inline Vec pgd_simplex(int n, const Fn& f, const GradFn& grad,
                       int iters = 5000) {
  Vec x(n, 1.0 / n);
  double fx = f(x);
  for (int it = 0; it < iters; ++it) {
    const Vec g = grad(x);
    double step = 1.0;
    Vec xn;
    double fn = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      Vec cand(n);
      for (int k = 0; k < n; ++k) cand[k] = x[k] - step * g[k];
      cand = project_simplex_bisect(cand);
      double dir = 0.0;
      for (int k = 0; k < n; ++k) dir += g[k] * (cand[k] - x[k]);
      const double fc = f(cand);
      if (fc <= fx + 1e-4 * dir) {
        xn = std::move(cand);
        fn = fc;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    double move = 0.0;
    for (int k = 0; k < n; ++k) move = std::max(move, std::abs(xn[k] - x[k]));
    x = std::move(xn);
    fx = fn;
    if (move < 1e-13) break;
  }
  return x;
}

// Raw prox subproblem objective from the update rule's definition:
// <x, c + dnu> + rho * B(x, y) + delta * B(x, x_prev), with B spelled out
// per potential. entropy=false means the squared euclidean potential.
inline Fn prox_objective(bool entropy, Vec c_plus_dnu, Vec y, Vec x_prev,
                         double rho, double delta) {
  return [=](const Vec& x) {
    double val = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) val += x[k] * c_plus_dnu[k];
    if (entropy) {
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double xk = std::max(x[k], 1e-300);
        val += rho * (xk * (std::log(xk) - std::log(y[k])) + y[k] - xk);
        if (delta > 0.0) {
          const double pk = std::max(x_prev[k], 1e-300);
          val += delta * (xk * (std::log(xk) - std::log(pk)) + pk - xk);
        }
      }
    } else {
      for (std::size_t k = 0; k < x.size(); ++k) {
        val += 0.5 * rho * (x[k] - y[k]) * (x[k] - y[k]);
        if (delta > 0.0)
          val += 0.5 * delta * (x[k] - x_prev[k]) * (x[k] - x_prev[k]);
      }
    }
    return val;
  };
}

inline GradFn prox_gradient(bool entropy, Vec c_plus_dnu, Vec y, Vec x_prev,
                            double rho, double delta) {
  return [=](const Vec& x) {
    Vec g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      g[k] = c_plus_dnu[k];
      if (entropy) {
        const double xk = std::max(x[k], 1e-300);
        g[k] += rho * (std::log(xk) - std::log(y[k]));
        if (delta > 0.0)
          g[k] += delta * (std::log(xk) - std::log(std::max(x_prev[k], 1e-300)));
      } else {
        g[k] += rho * (x[k] - y[k]);
        if (delta > 0.0) g[k] += delta * (x[k] - x_prev[k]);
      }
    }
    return g;
  };
}

// Violation of s being in the simplex normal cone at x: s must be constant
// on the support of x and no larger elsewhere.
inline double normal_cone_violation(const Vec& s, const Vec& x,
                                    double support_tol = 1e-9) {
  double cbar = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.size(); ++k)
    if (x[k] > support_tol) cbar = std::max(cbar, s[k]);
  double viol = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (x[k] > support_tol)
      viol = std::max(viol, cbar - s[k]);
    else
      viol = std::max(viol, s[k] - cbar);
  }
  return viol;
}

inline Vec random_simplex_point(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec x(n);
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    x[k] = -std::log(1.0 - unif(rng));
    s += x[k];
  }
  for (int k = 0; k < n; ++k) x[k] /= s;
  return x;
}

inline Vec random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vec x(n);
  for (int k = 0; k < n; ++k) x[k] = normal(rng);
  return x;
}

struct SvgGridLine {
  double value = 0.0;  // data-log10 or data-t
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
};

struct SvgSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

inline std::string svg_panel(const std::string& svg, const std::string& id) {
  const std::string open = "<g id=\"panel-" + id + "\">";
  const std::size_t a = svg.find(open);
  if (a == std::string::npos) throw std::runtime_error("panel not found: " + id);
  const std::size_t b = svg.find("</g>", a);
  return svg.substr(a, b - a);
}

inline std::vector<SvgGridLine> svg_gridlines(const std::string& panel,
                                              const std::string& attr) {
  std::vector<SvgGridLine> lines;
  const std::regex re("<line class=\"grid\" data-" + attr +
                      "=\"([^\"]+)\" x1=\"([^\"]+)\" x2=\"([^\"]+)\" "
                      "y1=\"([^\"]+)\" y2=\"([^\"]+)\"");
  for (auto it = std::sregex_iterator(panel.begin(), panel.end(), re);
       it != std::sregex_iterator(); ++it) {
    SvgGridLine g;
    g.value = std::stod((*it)[1]);
    g.x1 = std::stod((*it)[2]);
    g.x2 = std::stod((*it)[3]);
    g.y1 = std::stod((*it)[4]);
    g.y2 = std::stod((*it)[5]);
    lines.push_back(g);
  }
  return lines;
}

inline std::vector<SvgSeries> svg_series(const std::string& panel) {
  std::vector<SvgSeries> out;
  const std::regex re(
      "<polyline class=\"series\" data-series=\"([^\"]+)\"[^>]*points=\"([^\"]*)\"");
  for (auto it = std::sregex_iterator(panel.begin(), panel.end(), re);
       it != std::sregex_iterator(); ++it) {
    SvgSeries s;
    s.name = (*it)[1];
    const std::string pts = (*it)[2];
    std::size_t pos = 0;
    while (pos < pts.size()) {
      const std::size_t comma = pts.find(',', pos);
      if (comma == std::string::npos) break;
      std::size_t space = pts.find(' ', comma);
      if (space == std::string::npos) space = pts.size();
      s.points.emplace_back(std::stod(pts.substr(pos, comma - pos)),
                            std::stod(pts.substr(comma + 1, space - comma - 1)));
      pos = space + 1;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace oracle
