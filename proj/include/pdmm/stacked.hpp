#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace pdmm {

// m stacked blocks of dimension n, contiguous row-major storage.
struct StackedPoint {
  int m = 0;
  int n = 0;
  std::vector<double> data;

  StackedPoint() = default;
  StackedPoint(int m_, int n_)
      : m(m_), n(n_), data(static_cast<std::size_t>(m_) * n_, 0.0) {}

  std::span<double> block(int i) {
    return {data.data() + static_cast<std::size_t>(i) * n,
            static_cast<std::size_t>(n)};
  }
  std::span<const double> block(int i) const {
    return {data.data() + static_cast<std::size_t>(i) * n,
            static_cast<std::size_t>(n)};
  }

  static StackedPoint zeros(int m, int n) { return StackedPoint(m, n); }

  static StackedPoint uniform_simplex(int m, int n) {
    StackedPoint x(m, n);
    const double u = 1.0 / n;
    for (auto& v : x.data) v = u;
    return x;
  }

  static StackedPoint repeated(int m, std::span<const double> block) {
    StackedPoint x(m, static_cast<int>(block.size()));
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < x.n; ++k) x.block(i)[k] = block[k];
    return x;
  }
};

}  // namespace pdmm
