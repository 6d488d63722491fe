#pragma once
// Recovering h with dh = α from a discrete closed 1-form on a mesh.
//
// Torus grids: least squares in Fourier space (the spectral gradient is
// diagonal there), after checking that the cycle integrals of α vanish.
// Box grids: least squares over grid edges, with each edge difference
// h(j) − h(i) matched to a high-order line integral of α along the edge.

#include <Eigen/Sparse>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lagcal/lag_mesh.hpp"

namespace lagcal {

class NotExactError : public std::runtime_error {
 public:
  NotExactError(const std::string& what, std::vector<double> cycles)
      : std::runtime_error(what), cycle_integrals(std::move(cycles)) {}
  std::vector<double> cycle_integrals;
};

struct Normalization {
  enum class Kind { CompactSupport, MeanZero };
  Kind kind = Kind::MeanZero;
  /// Per-node weights for the mean-zero condition Σ h w = 0; empty selects
  /// the default (pullback of re Ω, else induced volume, else plain quadrature).
  ScalarField weight;

  static Normalization compact_support() { return {Kind::CompactSupport, {}}; }
  static Normalization mean_zero(ScalarField w = {}) { return {Kind::MeanZero, std::move(w)}; }
  /// Compact support on box grids, mean-zero on tori.
  static Normalization natural_for(const LagMesh& mesh) {
    return mesh.grid().is_torus() ? mean_zero() : compact_support();
  }
};

struct PotentialResult {
  ScalarField h;
  double residual = 0.0;     // ‖grad h − α‖₂ / ‖α‖₂ (0 for α = 0)
  double closedness = 0.0;   // max |∂_a α_b − ∂_b α_a|
  std::vector<double> cycle_integrals;  // torus grids, one per axis
};

inline constexpr double kDefaultExactnessTol = 1e-6;

/// Default mean-zero weights: quadrature weights times the pullback of re Ω
/// (oriented), else times the induced volume, else the bare quadrature weights.
inline ScalarField default_mean_weight(const LagMesh& mesh) {
  ScalarField w = mesh.grid().weights();
  const auto& m = mesh.model();
  if (m.holo_volume) {
    const auto v = pullback_top(mesh, real_part(*m.holo_volume));
    for (std::size_t k = 0; k < w.size(); ++k) w[k] *= mesh.orientation() * v[k];
  } else if (m.complex_structure) {
    const auto v = induced_volume(mesh);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] *= v[k];
  }
  return w;
}

namespace detail {

/// In-place n-dimensional DFT over the grid layout.
inline void fft_nd(const Grid& g, std::vector<std::complex<double>>& data, bool inverse) {
  Eigen::FFT<double> fft;
  for (int a = 0; a < g.n(); ++a) {
    const int N = g.count(a);
    const std::size_t st = g.stride(a);
    std::vector<std::complex<double>> line(N), out(N);
    for (std::size_t base = 0; base < g.nodes(); ++base) {
      if (g.unravel(base)[a] != 0) continue;
      for (int i = 0; i < N; ++i) line[i] = data[base + i * st];
      if (inverse)
        fft.inv(out, line);
      else
        fft.fwd(out, line);
      for (int i = 0; i < N; ++i) data[base + i * st] = out[i];
    }
  }
}

inline double relative_residual(const LagMesh& mesh, const ScalarField& h, const MeshOneForm& alpha) {
  const auto g = grid_gradient(mesh, h);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < alpha.components.size(); ++i) {
    num += (g.components[i] - alpha.components[i]) * (g.components[i] - alpha.components[i]);
    den += alpha.components[i] * alpha.components[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline void apply_mean_zero(const LagMesh& mesh, ScalarField& h, const ScalarField& weight) {
  const ScalarField w = weight.empty() ? default_mean_weight(mesh) : weight;
  if (w.size() != h.size()) throw MeshError("mean-zero weight has wrong size");
  double sw = 0.0, shw = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    sw += w[k];
    shw += w[k] * h[k];
  }
  if (std::abs(sw) < 1e-300) throw MeshError("mean-zero weight has vanishing total");
  const double c = shw / sw;
  for (auto& v : h) v -= c;
}

inline ScalarField torus_potential(const LagMesh& mesh, const MeshOneForm& alpha) {
  const Grid& g = mesh.grid();
  const int n = g.n();
  std::vector<std::vector<std::complex<double>>> spec(n);
  for (int a = 0; a < n; ++a) {
    const auto f = alpha.axis_field(a);
    spec[a].assign(f.begin(), f.end());
    fft_nd(g, spec[a], false);
  }
  std::vector<std::complex<double>> hs(g.nodes(), 0.0);
  for (std::size_t k = 0; k < g.nodes(); ++k) {
    const auto idx = g.unravel(k);
    std::complex<double> num = 0.0;
    double den = 0.0;
    for (int a = 0; a < n; ++a) {
      const int N = g.count(a);
      int kk = idx[a] <= N / 2 ? idx[a] : idx[a] - N;
      if (2 * idx[a] == N) kk = 0;
      const double w = 2.0 * std::numbers::pi * kk;
      // ∂_a ĥ = i w ĥ
      num += std::complex<double>(0.0, -w) * spec[a][k];
      den += w * w;
    }
    hs[k] = den > 0.0 ? num / den : 0.0;
  }
  fft_nd(g, hs, true);
  ScalarField h(g.nodes());
  for (std::size_t k = 0; k < h.size(); ++k) h[k] = hs[k].real();
  return h;
}

inline ScalarField box_potential(const LagMesh& mesh, const MeshOneForm& alpha, bool compact) {
  const Grid& g = mesh.grid();
  const std::size_t nodes = g.nodes();
  std::vector<int> pinned(nodes, 0);
  if (compact) {
    for (std::size_t k = 0; k < nodes; ++k) pinned[k] = g.in_collar(k) ? 1 : 0;
  } else {
    pinned[0] = 1;
  }
  std::vector<long> free_index(nodes, -1);
  long nfree = 0;
  for (std::size_t k = 0; k < nodes; ++k)
    if (!pinned[k]) free_index[k] = nfree++;
  ScalarField h(nodes, 0.0);
  if (nfree == 0) return h;

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
  for (int a = 0; a < g.n(); ++a) {
    const auto comp = alpha.axis_field(a);
    const int N = g.count(a);
    const std::size_t st = g.stride(a);
    for (std::size_t k = 0; k < nodes; ++k) {
      const auto idx = g.unravel(k);
      if (idx[a] >= N - 1) continue;
      const std::size_t line0 = k - static_cast<std::size_t>(idx[a]) * st;
      const auto [s, w] = g.edge_weights(a, idx[a]);
      double e = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) e += w[j] * comp[line0 + (s + j) * st];
      const std::size_t i0 = k, i1 = k + st;
      const long f0 = free_index[i0], f1 = free_index[i1];
      // (h1 − h0 − e)^2
      if (f0 >= 0) {
        trip.emplace_back(f0, f0, 1.0);
        rhs[f0] -= e;
      }
      if (f1 >= 0) {
        trip.emplace_back(f1, f1, 1.0);
        rhs[f1] += e;
      }
      if (f0 >= 0 && f1 >= 0) {
        trip.emplace_back(f0, f1, -1.0);
        trip.emplace_back(f1, f0, -1.0);
      }
    }
  }
  Eigen::SparseMatrix<double> L(nfree, nfree);
  L.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
  if (solver.info() != Eigen::Success) throw std::runtime_error("potential recovery: factorization failed");
  const Eigen::VectorXd x = solver.solve(rhs);
  for (std::size_t k = 0; k < nodes; ++k)
    if (free_index[k] >= 0) h[k] = x[free_index[k]];
  return h;
}

}  // namespace detail

/// Cycle integrals of α along the grid axes (torus grids; mean over parallel lines).
inline std::vector<double> cycle_integrals(const LagMesh& mesh, const MeshOneForm& alpha) {
  std::vector<double> out;
  if (!mesh.grid().is_torus()) return out;
  for (int a = 0; a < mesh.n(); ++a) {
    const auto f = alpha.axis_field(a);
    double s = 0.0;
    for (double v : f) s += v;
    out.push_back(s / static_cast<double>(f.size()));
  }
  return out;
}

inline PotentialResult recover_potential(const LagMesh& mesh, const MeshOneForm& alpha,
                                         const Normalization& norm = Normalization::mean_zero(),
                                         double exactness_tol = kDefaultExactnessTol) {
  if (alpha.n != mesh.n() || alpha.nodes() != mesh.nodes()) throw MeshError("one-form does not match mesh");
  PotentialResult r;
  r.closedness = closedness_residual(mesh, alpha);
  if (mesh.grid().is_torus()) {
    r.cycle_integrals = cycle_integrals(mesh, alpha);
    double worst = 0.0;
    for (double c : r.cycle_integrals) worst = std::max(worst, std::abs(c));
    if (worst > exactness_tol) {
      std::ostringstream os;
      os << "one-form is not exact: cycle integrals";
      for (double c : r.cycle_integrals) os << ' ' << c;
      throw NotExactError(os.str(), r.cycle_integrals);
    }
    if (norm.kind == Normalization::Kind::CompactSupport)
      throw MeshError("compact-support normalization needs a box grid");
    r.h = detail::torus_potential(mesh, alpha);
  } else {
    r.h = detail::box_potential(mesh, alpha, norm.kind == Normalization::Kind::CompactSupport);
  }
  if (norm.kind == Normalization::Kind::MeanZero) detail::apply_mean_zero(mesh, r.h, norm.weight);
  r.residual = detail::relative_residual(mesh, r.h, alpha);
  return r;
}

}  // namespace lagcal
