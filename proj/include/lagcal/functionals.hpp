#pragma once
// Global functionals on paths of Lagrangians: 𝒞, its closed form in the
// exact case, the Calabi homomorphism on products, Banyaga's endpoint
// formula, flux, energy and volume.

#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lagcal/catalog.hpp"
#include "lagcal/isotopy.hpp"
#include "lagcal/potential.hpp"
#include "lagcal/stencil.hpp"

namespace lagcal {

class NormalizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotHomogeneousError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotAlmostCalibratedError : public std::runtime_error {
 public:
  NotAlmostCalibratedError(const std::string& what, std::size_t node, double cos_theta)
      : std::runtime_error(what), worst_node(node), worst_cos(cos_theta) {}
  std::size_t worst_node;
  double worst_cos;
};

/// Quadrature weights over the samples of one segment (composite Simpson when
/// uniform, trapezoid otherwise).
inline std::vector<double> segment_time_weights(const IsotopyPath& path, std::size_t b, std::size_t e) {
  const int m = static_cast<int>(e - b);
  if (m == 0) return {0.0};
  const double h = (path.times[e] - path.times[b]) / m;
  bool uniform = true;
  for (std::size_t j = b; j < e; ++j)
    uniform = uniform && std::abs(path.times[j + 1] - path.times[j] - h) <= 1e-9 * std::max(1.0, std::abs(h));
  if (uniform) return simpson_weights(m, h);
  std::vector<double> w(m + 1, 0.0);
  for (std::size_t j = b; j < e; ++j) {
    const double dt = path.times[j + 1] - path.times[j];
    w[j - b] += 0.5 * dt;
    w[j + 1 - b] += 0.5 * dt;
  }
  return w;
}

struct CcOptions {
  std::optional<Normalization> normalization;  // default: natural for the grid
  double exactness_tol = kDefaultExactnessTol;
  double beta_tol = 1e-8;  // |∫_{Λ0} β| on closed meshes
};

struct CcResult {
  double value = 0.0;
  /// ∫_{Λ_t} h_t β per sample and segment side (segment, sample index, value).
  std::vector<double> sample_times;
  std::vector<double> sample_values;
  double max_potential_residual = 0.0;
  double max_generator_residual = 0.0;
  double beta_on_initial = 0.0;
};

namespace detail {

inline double weighted_beta_integral(const IsotopyPath& path, std::size_t j, std::size_t seg, const RealForm& beta,
                                     const Normalization& norm, double tol, CcResult& acc) {
  const LagMesh& mesh = path.meshes[j];
  const auto vf = path_velocity_form(path, j, seg);
  const auto pot = recover_potential(mesh, vf.alpha, norm, tol);
  acc.max_potential_residual = std::max(acc.max_potential_residual, pot.residual);
  if (!std::isnan(vf.generator_residual))
    acc.max_generator_residual = std::max(acc.max_generator_residual, vf.generator_residual);
  return integrate_weighted(mesh, std::span<const double>(pot.h), beta);
}

inline void check_beta_on_closed(const IsotopyPath& path, const RealForm& beta, double tol, CcResult& r) {
  const LagMesh& m0 = path.front();
  r.beta_on_initial = integrate_top_form(m0, beta);
  if (m0.grid().is_torus() && std::abs(r.beta_on_initial) > tol) {
    std::ostringstream os;
    os << "integral of beta over the closed initial mesh is " << r.beta_on_initial << ", not zero";
    throw NormalizationError(os.str());
  }
}

}  // namespace detail

/// 𝒞(Λ) = ∫ ∫_{Λ_t} h_t β dt.
inline CcResult cc_invariant(const IsotopyPath& path, const RealForm& beta, const CcOptions& opt = {}) {
  path.validate();
  CcResult r;
  detail::check_beta_on_closed(path, beta, opt.beta_tol, r);
  const Normalization norm = opt.normalization ? *opt.normalization : Normalization::natural_for(path.front());
  for (std::size_t s = 0; s < path.segments.size(); ++s) {
    const auto [b, e] = path.segments[s];
    const auto w = segment_time_weights(path, b, e);
    for (std::size_t j = b; j <= e; ++j) {
      const double v = detail::weighted_beta_integral(path, j, s, beta, norm, opt.exactness_tol, r);
      r.sample_times.push_back(path.times[j]);
      r.sample_values.push_back(v);
      r.value += w[j - b] * v;
    }
  }
  return r;
}

/// 𝒞 of the prefixes ending at the given sample indices of a single-segment
/// path (each prefix must have an even number of intervals for Simpson).
inline std::vector<double> cc_cumulative(const IsotopyPath& path, const RealForm& beta,
                                         const std::vector<std::size_t>& ends, const CcOptions& opt = {}) {
  path.validate();
  if (path.segments.size() != 1) throw PathError("cumulative 𝒞 needs a single-segment path");
  CcResult r;
  detail::check_beta_on_closed(path, beta, opt.beta_tol, r);
  const Normalization norm = opt.normalization ? *opt.normalization : Normalization::natural_for(path.front());
  std::vector<double> vals(path.size());
  for (std::size_t j = 0; j < path.size(); ++j)
    vals[j] = detail::weighted_beta_integral(path, j, 0, beta, norm, opt.exactness_tol, r);
  std::vector<double> out;
  for (std::size_t e : ends) {
    if (e >= path.size()) throw PathError("prefix end out of range");
    const auto w = segment_time_weights(path, 0, e);
    double s = 0.0;
    for (std::size_t j = 0; j <= e; ++j) s += w[j] * vals[j];
    out.push_back(s);
  }
  return out;
}

/// (1/(c+1)) (∫_{Λ0} λ∧γ − ∫_{Λ1} λ∧γ).
inline double cc_exact_closed_form(const LagMesh& mesh0, const LagMesh& mesh1, const AmbientModel& model) {
  if (!model.liouville_primitive || !model.gamma_primitive || !model.scaling_constant)
    throw ModelError("closed form needs λ, γ and c on the model");
  const double c = *model.scaling_constant;
  if (std::abs(c + 1.0) < 1e-12) throw ModelError("closed form is undefined for c = -1");
  const RealForm lg = wedge(*model.liouville_primitive, *model.gamma_primitive);
  return (integrate_top_form(mesh0, lg) - integrate_top_form(mesh1, lg)) / (c + 1.0);
}

struct LiouvilleGamma {
  RealForm gamma;
  double c = 0.0;
  double fit_residual = 0.0;
};

/// Detects c with L_ξ β = c β (ξ the Liouville field of λ) and returns γ = i_ξβ / c.
inline LiouvilleGamma liouville_gamma(const AmbientModel& model, const RealForm& beta, std::uint64_t seed = 7,
                                      std::size_t samples = 64, double tol = 1e-6) {
  if (!model.liouville_primitive) throw ModelError("model has no Liouville primitive");
  const ModelPtr mp = std::make_shared<const AmbientModel>(model);
  auto xi = [mp](std::span<const double> p) { return liouville_vector_field(*mp, p).components; };
  const RealForm ixb = contract(xi, beta);
  const RealForm lie = exterior_derivative(ixb) + contract(xi, exterior_derivative(beta));
  const auto pts = sample_points(model, samples, seed);
  double num = 0.0, den = 0.0;
  std::vector<std::pair<FormValue<double>, FormValue<double>>> vals;
  for (const auto& p : pts) {
    const auto L = lie(p), B = beta(p);
    for (std::size_t i = 0; i < L.raw().size(); ++i) {
      num += L.raw()[i] * B.raw()[i];
      den += B.raw()[i] * B.raw()[i];
    }
    vals.emplace_back(L, B);
  }
  if (den <= 0.0) throw NotHomogeneousError("beta vanishes at every sample point");
  const double c = num / den;
  double res = 0.0;
  for (const auto& [L, B] : vals) res = std::max(res, (L - c * B).max_abs());
  if (res > tol) {
    std::ostringstream os;
    os << "no constant c with L_xi beta = c beta (residual " << res << ")";
    throw NotHomogeneousError(os.str());
  }
  if (std::abs(c) < tol) throw NotHomogeneousError("L_xi beta vanishes; c = 0 is excluded");
  return {(1.0 / c) * ixb, c, res};
}

/// Copy of the model with β, the detected γ and c installed, after checking
/// λ∧β + c ω∧γ = 0 at sample points.
inline AmbientModel install_liouville_gamma(const AmbientModel& model, const RealForm& beta, double tol = 1e-6) {
  const auto lg = liouville_gamma(model, beta);
  AmbientModel out = model;
  out.beta = beta;
  out.gamma_primitive = lg.gamma;
  out.scaling_constant = lg.c;
  const auto diag = check_model(out, sample_points(out, 32, 11));
  if (!(diag.lbog_residual <= tol)) throw NotHomogeneousError("λ∧β + c ω∧γ does not vanish for the detected γ");
  return out;
}

/// ∫_0^1 ∫_M H_t ω^m dt over a box grid covering M's coordinates directly.
inline double classical_calabi(const AmbientModel& M, const HamiltonianFamily& H, const Grid& grid, int steps) {
  if (grid.n() != M.dim) throw GridError("calabi grid must cover every coordinate of M");
  if (steps < 1) throw PathError("need at least one time step");
  const RealForm top = wedge_power(M.omega, M.dim / 2);
  const auto tw = simpson_weights(steps, 1.0 / steps);
  double total = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double t = double(i) / steps;
    double s = 0.0;
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
      const auto p = grid.params(k);
      const auto v = top(p);
      s += grid.weights()[k] * H(t, p) * v[(Mask(1) << M.dim) - 1];
    }
    total += tw[i] * s;
  }
  return total;
}

/// Graph of the identity of M in the product model, on a box grid of M.
inline LagMesh diagonal_mesh(ModelPtr product, const Grid& grid) {
  const int half = product->dim / 2;
  return LagMesh::from_map(product, grid, [half](std::span<const double> u, std::span<double> x) {
    for (int i = 0; i < half; ++i) {
      x[i] = u[i];
      x[half + i] = u[i];
    }
  });
}

/// Lifts H on M to H∘p2 on M × M.
inline HamiltonianFamily lift_to_second_factor(const HamiltonianFamily& H, int half) {
  ScalarFunction f(
      [H, half](double t, std::span<const double> p) { return H(t, p.subspan(half, half)); },
      [H, half](double t, std::span<const double> p, std::span<double> g) {
        std::fill(g.begin(), g.end(), 0.0);
        H.H.gradient(t, p.subspan(half, half), g.subspan(half, half));
      });
  return {f, H.support};
}

/// −(1/(m+1)) ∫_M φ1*λ_M ∧ λ_M ∧ ω_M^{m−1}, evaluated on the final graph mesh.
inline double banyaga_value(const IsotopyPath& path, double graph_tol = 1e-9) {
  path.validate();
  const LagMesh& L1 = path.back();
  const int D = L1.D(), half = D / 2, m = half / 2;
  if (L1.grid().is_torus() || L1.n() != half) throw PathError("Banyaga's formula needs a graph path on a product box");
  for (std::size_t k = 0; k < L1.nodes(); ++k) {
    const auto u = L1.grid().params(k);
    const auto x = L1.point(k);
    for (int i = 0; i < half; ++i)
      if (std::abs(x[i] - u[i]) > graph_tol) throw PathError("mesh is not a graph over the first factor");
  }
  std::vector<std::string> names;
  for (int i = 0; i < D; ++i) names.push_back("c" + std::to_string(i));
  std::map<std::vector<int>, std::string> l1, l2;
  std::vector<std::pair<std::vector<int>, double>> w1;
  for (int k = 0; k < m; ++k) {
    const int x1 = 2 * k, y1 = x1 + 1, x2 = half + 2 * k, y2 = x2 + 1;
    l1[{y1}] = "0.5*" + names[x1];
    l1[{x1}] = "-0.5*" + names[y1];
    l2[{y2}] = "0.5*" + names[x2];
    l2[{x2}] = "-0.5*" + names[y2];
    w1.push_back({{x1, y1}, 1.0});
  }
  const RealForm lam1 = form_from_expressions(D, 1, names, l1);
  const RealForm lam2 = form_from_expressions(D, 1, names, l2);
  const RealForm om1 = constant_form(D, 2, w1);
  const RealForm integrand = wedge(wedge(lam2, lam1), wedge_power(om1, m - 1));
  return -integrate_top_form(L1, integrand) / (m + 1);
}

/// Grid-axis cycle through a base node (torus grids).
struct GridLoop {
  int axis = 0;
  std::size_t base_node = 0;
};

/// ∫∫ ω(∂_u ℓ, ∂_t ℓ) du dt over the cylinder swept by the loop.
inline double flux_pairing(const IsotopyPath& path, const GridLoop& loop) {
  path.validate();
  const Grid& g = path.front().grid();
  if (!g.is_torus()) throw PathError("flux loops need a torus grid");
  if (loop.axis < 0 || loop.axis >= g.n() || loop.base_node >= g.nodes()) throw PathError("invalid loop");
  const int N = g.count(loop.axis);
  const std::size_t st = g.stride(loop.axis);
  const std::size_t start = loop.base_node - static_cast<std::size_t>(g.unravel(loop.base_node)[loop.axis]) * st;
  double total = 0.0;
  for (std::size_t s = 0; s < path.segments.size(); ++s) {
    const auto [b, e] = path.segments[s];
    const auto w = segment_time_weights(path, b, e);
    for (std::size_t j = b; j <= e; ++j) {
      const LagMesh& mesh = path.meshes[j];
      const int D = mesh.D();
      std::vector<double> vel;
      if (!path.velocity) vel = node_velocities(path, j, s);
      double ring = 0.0;
      std::vector<double> v(D);
      for (int i = 0; i < N; ++i) {
        const std::size_t k = start + i * st;
        const auto p = mesh.point(k);
        if (path.velocity)
          path.velocity(path.times[j], p, v);
        else
          std::copy(vel.begin() + k * D, vel.begin() + (k + 1) * D, v.begin());
        const auto W = two_form_matrix(mesh.model().omega(p));
        const auto fu = mesh.frame(k, loop.axis);
        double om = 0.0;
        for (int a = 0; a < D; ++a)
          for (int c = 0; c < D; ++c) om += fu[a] * W[a * D + c] * v[c];
        ring += om;
      }
      total += w[j - b] * ring * g.spacing(loop.axis);
    }
  }
  return total;
}

/// Per-node cos θ; throws when the mesh leaves the almost-calibrated set.
inline std::vector<double> cos_phase(const LagMesh& mesh, double cos_floor) {
  const auto& m = mesh.model();
  const auto om = pullback_top(mesh, m.Omega());
  std::vector<double> c(mesh.nodes());
  std::size_t worst = 0;
  for (std::size_t k = 0; k < mesh.nodes(); ++k) {
    const double a = std::abs(om[k]);
    if (a < 1e-12) throw DegenerateImmersionError("holomorphic volume vanishes on the tangent frame");
    c[k] = mesh.orientation() * om[k].real() / a;
    if (c[k] < c[worst]) worst = k;
  }
  if (c[worst] < cos_floor) {
    std::ostringstream os;
    os << "mesh leaves the almost-calibrated set: cos(theta) = " << c[worst] << " at node " << worst;
    throw NotAlmostCalibratedError(os.str(), worst, c[worst]);
  }
  return c;
}

inline constexpr double kDefaultCosFloor = 0.05;

/// ∫ ∫_{Λ_t} h_t² re Ω dt with h_t normalized mean-zero against re Ω.
inline double energy(const IsotopyPath& path, double cos_floor = kDefaultCosFloor,
                     double exactness_tol = kDefaultExactnessTol) {
  path.validate();
  const auto& m = path.front().model();
  const RealForm reO = real_part(m.Omega());
  double total = 0.0;
  for (std::size_t s = 0; s < path.segments.size(); ++s) {
    const auto [b, e] = path.segments[s];
    const auto w = segment_time_weights(path, b, e);
    for (std::size_t j = b; j <= e; ++j) {
      const LagMesh& mesh = path.meshes[j];
      cos_phase(mesh, cos_floor);
      const auto vf = path_velocity_form(path, j, s);
      const auto pot = recover_potential(mesh, vf.alpha, Normalization::mean_zero(), exactness_tol);
      ScalarField h2(pot.h.size());
      for (std::size_t k = 0; k < h2.size(); ++k) h2[k] = pot.h[k] * pot.h[k];
      total += w[j - b] * integrate_weighted(mesh, std::span<const double>(h2), reO);
    }
  }
  return total;
}

inline double volume(const LagMesh& mesh) {
  const auto v = induced_volume(mesh);
  const auto& w = mesh.grid().weights();
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += w[k] * v[k];
  return s;
}

}  // namespace lagcal
