#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pdmm/random.hpp"

namespace pdmm {

// Simple undirected graph on vertices 0..m-1. Edges are stored with i < j in
// lexicographic order; adjacency lists are kept sorted.
struct Graph {
  int m = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> adjacency;

  static Graph from_edges(int m, std::vector<std::pair<int, int>> edges) {
    if (m < 2) throw std::invalid_argument("graph needs at least two vertices");
    Graph g;
    g.m = m;
    for (auto& [a, b] : edges) {
      if (a == b) throw std::invalid_argument("self loop");
      if (a < 0 || b < 0 || a >= m || b >= m)
        throw std::invalid_argument("edge endpoint out of range");
      if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edges = std::move(edges);
    g.adjacency.assign(m, {});
    for (const auto& [a, b] : g.edges) {
      g.adjacency[a].push_back(b);
      g.adjacency[b].push_back(a);
    }
    for (auto& nbrs : g.adjacency) std::sort(nbrs.begin(), nbrs.end());
    return g;
  }

  int degree(int i) const { return static_cast<int>(adjacency[i].size()); }

  int max_degree() const {
    int d = 0;
    for (int i = 0; i < m; ++i) d = std::max(d, degree(i));
    return d;
  }

  bool has_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    return std::binary_search(edges.begin(), edges.end(), std::make_pair(a, b));
  }
};

inline bool is_connected(const Graph& g) {
  if (g.m == 0) return false;
  std::vector<char> seen(g.m, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : g.adjacency[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == g.m;
}

// Erdos-Renyi draw, redrawn until connected. Attempt k uses generator seed
// (seed + k); pairs are scanned with i ascending and j ascending past i, an
// edge is kept when uniform01() < p_edge. This enumeration order is part of
// the reproducibility contract.
inline Graph gen_erdos_renyi(int m, double p_edge, std::uint64_t seed) {
  if (m < 2) throw std::invalid_argument("gen_erdos_renyi: m must be >= 2");
  if (!(p_edge > 0.0) || p_edge > 1.0)
    throw std::invalid_argument("gen_erdos_renyi: p_edge must be in (0, 1]");
  const int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Xoshiro256pp rng(seed + static_cast<std::uint64_t>(attempt));
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (rng.uniform01() < p_edge) edges.emplace_back(i, j);
    Graph g = Graph::from_edges(m, std::move(edges));
    if (is_connected(g)) return g;
  }
  throw std::runtime_error(
      "gen_erdos_renyi: no connected draw after 1000 attempts (m=" +
      std::to_string(m) + ", p_edge=" + std::to_string(p_edge) + ")");
}

}  // namespace pdmm
