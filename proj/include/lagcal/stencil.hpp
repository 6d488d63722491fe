#pragma once
// Finite-difference and interpolation weights on arbitrary 1-D node sets.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace lagcal {

/// Fornberg's recursion: weights c[k][j] such that
///   f^(k)(z) ≈ Σ_j c[k][j] f(x_j),  k = 0..max_order.
inline std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> x, int max_order) {
  const int n = static_cast<int>(x.size());
  if (n == 0) throw std::invalid_argument("fornberg_weights: empty stencil");
  std::vector<std::vector<double>> c(max_order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

/// First index of a width-w stencil around position i in [0, count), kept inside the range.
inline int stencil_start(int i, int width, int count) {
  int s = i - width / 2;
  if (s < 0) s = 0;
  if (s + width > count) s = count - width;
  return s;
}

/// Composite Simpson weights for m uniform intervals of width h; a 3/8 panel
/// closes an odd interval count; m = 1, 2 fall back to trapezoid/Simpson.
inline std::vector<double> simpson_weights(int m, double h) {
  if (m < 1) throw std::invalid_argument("simpson_weights: need at least one interval");
  std::vector<double> w(m + 1, 0.0);
  if (m == 1) {
    w[0] = w[1] = 0.5 * h;
    return w;
  }
  const int simpson_intervals = (m % 2 == 0) ? m : m - 3;
  for (int i = 0; i + 2 <= simpson_intervals; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
  if (m % 2) {
    const int s = simpson_intervals;
    w[s] += 3.0 * h / 8.0;
    w[s + 1] += 9.0 * h / 8.0;
    w[s + 2] += 9.0 * h / 8.0;
    w[s + 3] += 3.0 * h / 8.0;
  }
  return w;
}

}  // namespace lagcal
