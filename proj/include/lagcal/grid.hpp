#pragma once
// Parameter grids for discretized submanifolds: periodic n-tori and compact
// boxes, with differentiation and quadrature.
//
// Node layout is axis-0 fastest. Torus grids have N nodes per axis on the
// unit-period parameter cube [0,1)^n and differentiate spectrally (FFT);
// box grids have N intervals (N + 1 nodes) per axis and use high-order
// finite differences, one-sided near the edges.

#include <unsupported/Eigen/FFT>

#include <array>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lagcal/stencil.hpp"

namespace lagcal {

enum class DomainKind { Torus, Box };

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kMaxParamDim = 4;

class Grid {
 public:
  static constexpr int kDefaultFdOrder = 8;
  static constexpr double kDefaultCollar = 0.1;

  static Grid torus(int n, int nodes_per_axis) {
    if (n < 1 || n > kMaxParamDim) throw GridError("grid dimension out of range");
    if (nodes_per_axis < 4 || nodes_per_axis % 2) throw GridError("torus grids need an even node count >= 4");
    Grid g;
    g.kind_ = DomainKind::Torus;
    g.counts_.assign(n, nodes_per_axis);
    g.lo_.assign(n, 0.0);
    g.spacing_.assign(n, 1.0 / nodes_per_axis);
    g.finish();
    return g;
  }

  static Grid box(std::vector<double> lo, std::vector<double> hi, int intervals_per_axis,
                  int fd_order = kDefaultFdOrder, double collar = kDefaultCollar) {
    const int n = static_cast<int>(lo.size());
    if (n < 1 || n > kMaxParamDim || hi.size() != lo.size()) throw GridError("grid dimension out of range");
    if (intervals_per_axis < 2 || intervals_per_axis % 2) throw GridError("box grids need an even interval count");
    if (fd_order < 2 || fd_order % 2 || fd_order >= intervals_per_axis) throw GridError("finite-difference order must be even and below the interval count");
    if (!(collar >= 0.0 && collar < 0.5)) throw GridError("collar fraction must lie in [0, 0.5)");
    Grid g;
    g.kind_ = DomainKind::Box;
    g.counts_.assign(n, intervals_per_axis + 1);
    g.lo_ = lo;
    for (int a = 0; a < n; ++a) {
      if (!(hi[a] > lo[a])) throw GridError("box upper bound must exceed lower bound");
      g.spacing_.push_back((hi[a] - lo[a]) / intervals_per_axis);
    }
    g.fd_order_ = fd_order;
    g.collar_ = collar;
    g.finish();
    return g;
  }

  DomainKind kind() const { return kind_; }
  bool is_torus() const { return kind_ == DomainKind::Torus; }
  int n() const { return static_cast<int>(counts_.size()); }
  int count(int axis) const { return counts_[axis]; }
  std::size_t nodes() const { return nodes_; }
  double spacing(int axis) const { return spacing_[axis]; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return is_torus() ? 1.0 : lo_[axis] + spacing_[axis] * (counts_[axis] - 1); }
  int fd_order() const { return fd_order_; }
  double collar_fraction() const { return collar_; }
  std::size_t stride(int axis) const { return strides_[axis]; }

  /// Intervals per axis: N for both kinds (torus: N nodes, box: N + 1 nodes).
  int resolution() const { return is_torus() ? counts_[0] : counts_[0] - 1; }

  std::array<int, kMaxParamDim> unravel(std::size_t node) const {
    std::array<int, kMaxParamDim> idx{};
    for (int a = 0; a < n(); ++a) {
      idx[a] = static_cast<int>(node % counts_[a]);
      node /= counts_[a];
    }
    return idx;
  }

  std::size_t node_of(std::span<const int> idx) const {
    std::size_t node = 0;
    for (int a = n() - 1; a >= 0; --a) {
      int i = idx[a];
      if (is_torus()) i = ((i % counts_[a]) + counts_[a]) % counts_[a];
      node = node * counts_[a] + i;
    }
    return node;
  }

  double param(std::size_t node, int axis) const { return lo_[axis] + spacing_[axis] * unravel(node)[axis]; }

  std::vector<double> params(std::size_t node) const {
    std::vector<double> u(n());
    const auto idx = unravel(node);
    for (int a = 0; a < n(); ++a) u[a] = lo_[a] + spacing_[a] * idx[a];
    return u;
  }

  /// Box nodes within the collar band (frozen to the reference immersion).
  bool in_collar(std::size_t node) const {
    if (is_torus()) return false;
    const auto idx = unravel(node);
    for (int a = 0; a < n(); ++a) {
      const int band = static_cast<int>(std::floor(collar_ * (counts_[a] - 1) + 1e-9));
      if (idx[a] <= band || idx[a] >= counts_[a] - 1 - band) return true;
    }
    return false;
  }

  /// ∂f/∂u_axis at every node. For torus grids, `jump` is f(u + e_axis) − f(u)
  /// (the lattice translation picked up around the cycle).
  std::vector<double> derivative(std::span<const double> f, int axis, double jump = 0.0) const {
    if (f.size() != nodes_) throw GridError("field size does not match grid");
    std::vector<double> out(nodes_);
    const int N = counts_[axis];
    const std::size_t st = strides_[axis];
    std::vector<double> line(N), dline(N);
    for (std::size_t base = 0; base < nodes_; ++base) {
      if (unravel(base)[axis] != 0) continue;
      for (int i = 0; i < N; ++i) line[i] = f[base + i * st];
      if (is_torus())
        spectral_derivative(line, jump, dline);
      else
        fd_derivative(axis, line, dline);
      for (int i = 0; i < N; ++i) out[base + i * st] = dline[i];
    }
    return out;
  }

  /// Quadrature weights: periodic trapezoid on tori, tensor Simpson on boxes.
  const std::vector<double>& weights() const { return weights_; }

  /// Integral of the field along the axis-`axis` grid line through `base`
  /// (torus grids only; periodic trapezoid).
  double line_integral(std::span<const double> f, std::size_t base, int axis) const {
    const int N = counts_[axis];
    const std::size_t st = strides_[axis];
    const std::size_t start = base - static_cast<std::size_t>(unravel(base)[axis]) * st;
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += f[start + i * st];
    return s * spacing_[axis];
  }

  /// Weights w_j of ∫_{x_i}^{x_{i+1}} g ≈ Σ_j w_j g(x_{start + j}) along a box axis (6th-order: 3-point
  /// Gauss–Legendre on the edge, interpolated from the nearest fd_order nodes).
  std::pair<int, std::vector<double>> edge_weights(int axis, int i) const {
    const int N = counts_[axis];
    const int width = std::min(fd_order_, N);
    const int s = stencil_start(i, width, N);
    std::vector<double> x(width);
    for (int j = 0; j < width; ++j) x[j] = (s + j - i) * 1.0;
    std::vector<double> w(width, 0.0);
    static const double gx[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
    static const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    for (int q = 0; q < 3; ++q) {
      const auto c = fornberg_weights(gx[q], x, 0);
      for (int j = 0; j < width; ++j) w[j] += gw[q] * c[0][j] * spacing_[axis];
    }
    return {s, w};
  }

 private:
  void finish() {
    nodes_ = 1;
    strides_.assign(n(), 0);
    for (int a = 0; a < n(); ++a) {
      strides_[a] = nodes_;
      nodes_ *= counts_[a];
    }
    std::vector<std::vector<double>> w1(n());
    for (int a = 0; a < n(); ++a) {
      if (is_torus())
        w1[a].assign(counts_[a], spacing_[a]);
      else
        w1[a] = simpson_weights(counts_[a] - 1, spacing_[a]);
    }
    weights_.assign(nodes_, 1.0);
    for (std::size_t k = 0; k < nodes_; ++k) {
      const auto idx = unravel(k);
      for (int a = 0; a < n(); ++a) weights_[k] *= w1[a][idx[a]];
    }
    if (!is_torus()) {
      fd_.resize(n());
      for (int a = 0; a < n(); ++a) {
        const int N = counts_[a];
        const int width = fd_order_ + 1;
        fd_[a].resize(N);
        for (int i = 0; i < N; ++i) {
          const int s = stencil_start(i, width, N);
          std::vector<double> x(width);
          for (int j = 0; j < width; ++j) x[j] = (s + j - i) * spacing_[a];
          fd_[a][i] = {s, fornberg_weights(0.0, x, 1)[1]};
        }
      }
    }
  }

  void spectral_derivative(const std::vector<double>& line, double jump, std::vector<double>& out) const {
    const int N = static_cast<int>(line.size());
    std::vector<std::complex<double>> in(N), spec(N), back(N);
    for (int i = 0; i < N; ++i) in[i] = line[i] - jump * (double(i) / N);
    Eigen::FFT<double> fft;
    fft.fwd(spec, in);
    for (int k = 0; k < N; ++k) {
      int kk = k <= N / 2 ? k : k - N;
      if (2 * k == N) kk = 0;
      spec[k] *= std::complex<double>(0.0, 2.0 * std::numbers::pi * kk);
    }
    fft.inv(back, spec);
    for (int i = 0; i < N; ++i) out[i] = back[i].real() + jump;
  }

  void fd_derivative(int axis, const std::vector<double>& line, std::vector<double>& out) const {
    const int N = static_cast<int>(line.size());
    for (int i = 0; i < N; ++i) {
      const auto& [s, w] = fd_[axis][i];
      double acc = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * line[s + j];
      out[i] = acc;
    }
  }

  DomainKind kind_ = DomainKind::Torus;
  std::vector<int> counts_;
  std::vector<double> lo_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::size_t nodes_ = 0;
  int fd_order_ = kDefaultFdOrder;
  double collar_ = kDefaultCollar;
  std::vector<double> weights_;
  std::vector<std::vector<std::pair<int, std::vector<double>>>> fd_;
};

}  // namespace lagcal
