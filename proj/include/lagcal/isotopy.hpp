#pragma once
// Hamiltonian flows of meshes, sampled paths of meshes and their velocity
// forms, and two-parameter family checks.

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lagcal/ambient_model.hpp"
#include "lagcal/lag_mesh.hpp"
#include "lagcal/potential.hpp"
#include "lagcal/stencil.hpp"

namespace lagcal {

class FlowDegradedError : public std::runtime_error {
 public:
  FlowDegradedError(const std::string& what, double t, double d) : std::runtime_error(what), time(t), defect(d) {}
  double time;
  double defect;
};

class PathError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kFlowDefectLimit = 1e-4;

enum class SupportKind { Compact, Normalized };

/// Time-dependent Hamiltonian H_t on the ambient model.
struct HamiltonianFamily {
  ScalarFunction H;
  SupportKind support = SupportKind::Compact;

  double operator()(double t, std::span<const double> p) const { return H(t, p); }

  static HamiltonianFamily from_expression(const std::string& text, const AmbientModel& m,
                                           SupportKind support = SupportKind::Compact) {
    return {ScalarFunction::from_expression(text, m.coordinates), support};
  }
};

/// σ'(t) H_{σ(t)}: generates the path t -> Λ_{σ(t)}.
inline HamiltonianFamily reparametrized(const HamiltonianFamily& f, std::function<double(double)> sigma,
                                        std::function<double(double)> dsigma) {
  ScalarFunction g(
      [f, sigma, dsigma](double t, std::span<const double> p) { return dsigma(t) * f.H(sigma(t), p); },
      [f, sigma, dsigma](double t, std::span<const double> p, std::span<double> out) {
        f.H.gradient(sigma(t), p, out);
        const double s = dsigma(t);
        for (auto& v : out) v *= s;
      });
  return {g, f.support};
}

/// H_t + c(t): same vector field.
inline HamiltonianFamily shifted(const HamiltonianFamily& f, std::function<double(double)> c) {
  ScalarFunction g([f, c](double t, std::span<const double> p) { return f.H(t, p) + c(t); },
                   [f](double t, std::span<const double> p, std::span<double> out) { f.H.gradient(t, p, out); });
  return {g, f.support};
}

/// Ambient velocity field (t, p) -> V.
using VelocityField = std::function<void(double, std::span<const double>, std::span<double>)>;

inline VelocityField hamiltonian_velocity(ModelPtr model, HamiltonianFamily H) {
  return [model, H](double t, std::span<const double> p, std::span<double> v) {
    const auto xi = hamiltonian_vector_field(*model, H.H, p, t);
    std::copy(xi.components.begin(), xi.components.end(), v.begin());
  };
}

/// Time-sampled meshes. Samples [segments[i].first, segments[i].second] form a
/// smooth piece (consecutive pieces share their junction sample).
struct IsotopyPath {
  std::vector<double> times;
  std::vector<LagMesh> meshes;
  std::optional<HamiltonianFamily> generator;
  VelocityField velocity;  // exact ambient generator when known
  std::vector<std::pair<std::size_t, std::size_t>> segments;

  std::size_t size() const { return meshes.size(); }
  const LagMesh& front() const { return meshes.front(); }
  const LagMesh& back() const { return meshes.back(); }

  void validate() const {
    if (meshes.empty() || times.size() != meshes.size()) throw PathError("path needs one time per mesh");
    if (segments.empty()) throw PathError("path has no segments");
  }

  std::size_t segment_of(std::size_t j) const {
    for (std::size_t s = 0; s < segments.size(); ++s)
      if (j >= segments[s].first && j < segments[s].second) return s;
    return segments.size() - 1;
  }
};

/// One classic RK4 step of every node.
inline std::vector<double> rk4_step(const std::vector<double>& x, int D, double t, double dt, const VelocityField& V) {
  const std::size_t n = x.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto eval = [&](const std::vector<double>& y, double tt, std::vector<double>& k) {
    for (std::size_t i = 0; i < n; i += D) V(tt, std::span<const double>(y.data() + i, D), std::span<double>(k.data() + i, D));
  };
  eval(x, t, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  eval(tmp, t + 0.5 * dt, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  eval(tmp, t + 0.5 * dt, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
  eval(tmp, t + dt, k4);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

/// Moves the mesh along V from t0 to t1 in `substeps` RK4 steps.
inline LagMesh flow_mesh(const LagMesh& mesh, const VelocityField& V, double t0, double t1, int substeps = 1) {
  std::vector<double> x = mesh.positions();
  const double dt = (t1 - t0) / substeps;
  for (int i = 0; i < substeps; ++i) x = rk4_step(x, mesh.D(), t0 + i * dt, dt, V);
  return mesh.with_positions(std::move(x));
}

/// Samples of a path driven by an ambient velocity field; the Lagrangian
/// defect is checked at every sample. Each of the `steps` sample intervals is
/// covered by `substeps` RK4 steps.
inline IsotopyPath flow_path_velocity(const LagMesh& mesh0, const VelocityField& V, int steps, double t0 = 0.0,
                                      double t1 = 1.0, int substeps = 1, double defect_limit = kFlowDefectLimit) {
  if (steps < 1 || substeps < 1) throw PathError("flow needs at least one step");
  IsotopyPath path;
  path.velocity = V;
  path.times.push_back(t0);
  path.meshes.push_back(mesh0);
  const double dt = (t1 - t0) / steps;
  std::vector<double> x = mesh0.positions();
  for (int i = 0; i < steps; ++i) {
    const double t = t0 + i * dt;
    for (int q = 0; q < substeps; ++q) x = rk4_step(x, mesh0.D(), t + q * dt / substeps, dt / substeps, V);
    LagMesh m = mesh0.with_positions(x);
    const double d = lagrangian_defect(m);
    if (d > defect_limit) {
      std::ostringstream os;
      os << "flow degraded at t = " << t + dt << ": Lagrangian defect " << d;
      throw FlowDegradedError(os.str(), t + dt, d);
    }
    path.times.push_back(i + 1 == steps ? t1 : t + dt);
    path.meshes.push_back(std::move(m));
  }
  path.segments = {{0, path.meshes.size() - 1}};
  return path;
}

inline IsotopyPath flow_path(const LagMesh& mesh0, const HamiltonianFamily& H, int steps, double t0 = 0.0,
                             double t1 = 1.0, int substeps = 1, double defect_limit = kFlowDefectLimit) {
  IsotopyPath p =
      flow_path_velocity(mesh0, hamiltonian_velocity(mesh0.model_ptr(), H), steps, t0, t1, substeps, defect_limit);
  p.generator = H;
  return p;
}

/// Λ_t = Λ_0 + t·w for a constant ambient vector w (symplectic, not
/// Hamiltonian on tori).
inline IsotopyPath translation_path(const LagMesh& mesh0, std::vector<double> w, int steps) {
  if (static_cast<int>(w.size()) != mesh0.D()) throw PathError("translation vector has wrong dimension");
  IsotopyPath path;
  path.velocity = [w](double, std::span<const double>, std::span<double> v) { std::copy(w.begin(), w.end(), v.begin()); };
  for (int i = 0; i <= steps; ++i) {
    const double t = double(i) / steps;
    std::vector<double> x = mesh0.positions();
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += t * w[k % w.size()];
    path.times.push_back(t);
    path.meshes.push_back(mesh0.with_positions(std::move(x)));
  }
  path.segments = {{0, path.meshes.size() - 1}};
  return path;
}

/// Path a followed by path b (b must start where a ends); b's times are shifted
/// to continue a's.
inline IsotopyPath concatenate(const IsotopyPath& a, const IsotopyPath& b, double match_tol = 1e-9) {
  a.validate();
  b.validate();
  const auto& pa = a.back().positions();
  const auto& pb = b.front().positions();
  if (pa.size() != pb.size()) throw PathError("concatenate: meshes do not match");
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (std::abs(pa[i] - pb[i]) > match_tol) throw PathError("concatenate: second path does not start at the end of the first");
  IsotopyPath out;
  out.times = a.times;
  out.meshes = a.meshes;
  out.segments = a.segments;
  const double shift = a.times.back() - b.times.front();
  const std::size_t offset = a.size() - 1;
  for (std::size_t j = 1; j < b.size(); ++j) {
    out.times.push_back(b.times[j] + shift);
    out.meshes.push_back(b.meshes[j]);
  }
  for (const auto& s : b.segments) out.segments.push_back({s.first + offset, s.second + offset});
  return out;
}

inline constexpr int kTimeStencilWidth = 7;

/// Time-derivative weights at sample j using up to kTimeStencilWidth samples of
/// its segment (6th order in the interior, one-sided near the segment ends).
inline std::pair<std::size_t, std::vector<double>> time_derivative_weights(const IsotopyPath& path, std::size_t j,
                                                                             std::size_t segment) {
  const auto [b, e] = path.segments.at(segment);
  if (j < b || j > e) throw PathError("sample not in segment");
  const int count = static_cast<int>(e - b + 1);
  if (count < 2) throw PathError("segment has a single sample");
  const int width = std::min(kTimeStencilWidth, count);
  const int s = stencil_start(static_cast<int>(j - b), width, count);
  std::vector<double> x(width);
  for (int i = 0; i < width; ++i) x[i] = path.times[b + s + i];
  const auto w = fornberg_weights(path.times[j], x, 1);
  return {b + s, w[1]};
}

/// Nodal velocities at sample j by time differences within the segment.
inline std::vector<double> node_velocities(const IsotopyPath& path, std::size_t j, std::size_t segment) {
  const auto [start, w] = time_derivative_weights(path, j, segment);
  std::vector<double> v(path.meshes[j].positions().size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto& x = path.meshes[start + i].positions();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += w[i] * x[k];
  }
  return v;
}

/// Pullback of i_v ω for nodal ambient vectors v (nodes x D).
inline MeshOneForm velocity_one_form(const LagMesh& mesh, const std::vector<double>& v) {
  MeshOneForm alpha{mesh.n(), std::vector<double>(mesh.nodes() * mesh.n())};
  const int d = mesh.D();
  for (std::size_t k = 0; k < mesh.nodes(); ++k) {
    const auto W = two_form_matrix(mesh.model().omega(mesh.point(k)));
    for (int a = 0; a < mesh.n(); ++a) {
      const auto f = mesh.frame(k, a);
      double s = 0.0;
      for (int i = 0; i < d; ++i)
        for (int jj = 0; jj < d; ++jj) s += v[k * d + i] * W[i * d + jj] * f[jj];
      alpha(k, a) = s;
    }
  }
  return alpha;
}

struct VelocityForm {
  MeshOneForm alpha;
  /// max |α − d(H_t|Λ)| when the path has a Hamiltonian generator, else NaN.
  double generator_residual = std::numeric_limits<double>::quiet_NaN();
};

inline VelocityForm path_velocity_form(const IsotopyPath& path, std::size_t j, std::optional<std::size_t> segment = {}) {
  path.validate();
  if (j >= path.size()) throw PathError("sample index out of range");
  const std::size_t seg = segment ? *segment : path.segment_of(j);
  const LagMesh& mesh = path.meshes[j];
  VelocityForm out{velocity_one_form(mesh, node_velocities(path, j, seg))};
  if (path.generator) {
    ScalarField hv(mesh.nodes());
    for (std::size_t k = 0; k < mesh.nodes(); ++k) hv[k] = path.generator->H(path.times[j], mesh.point(k));
    const auto dh = grid_gradient(mesh, hv);
    double m = 0.0;
    for (std::size_t i = 0; i < dh.components.size(); ++i)
      m = std::max(m, std::abs(dh.components[i] - out.alpha.components[i]));
    out.generator_residual = m;
  }
  return out;
}

/// Two-parameter Hamiltonian family (s, t, p) -> value.
using TwoParamFunction = std::function<double(double, double, std::span<const double>)>;

struct TwoParamResidual {
  double spatial_deviation = 0.0;  // max over (s,t) of max_p |R − mean_p R|
  double constant = 0.0;           // max over (s,t) of |mean_p R|
};

/// R = ∂H/∂s − ∂K/∂t − {H, K} sampled over (s, t) pairs and ambient points.
/// Parameter derivatives use 4th-order central differences with step `step`.
inline TwoParamResidual two_param_residual(const AmbientModel& model, const TwoParamFunction& H,
                                           const TwoParamFunction& K,
                                           const std::vector<std::pair<double, double>>& st_samples,
                                           const std::vector<std::vector<double>>& points, double step = 1e-3) {
  TwoParamResidual out;
  auto d4 = [step](const std::function<double(double)>& f, double x) {
    return (-f(x + 2 * step) + 8 * f(x + step) - 8 * f(x - step) + f(x - 2 * step)) / (12 * step);
  };
  for (const auto& [s, t] : st_samples) {
    std::vector<double> R;
    const ScalarFunction Hst([&H, s = s, t = t](double, std::span<const double> p) { return H(s, t, p); });
    const ScalarFunction Kst([&K, s = s, t = t](double, std::span<const double> p) { return K(s, t, p); });
    for (const auto& p : points) {
      const double dHs = d4([&](double ss) { return H(ss, t, p); }, s);
      const double dKt = d4([&](double tt) { return K(s, tt, p); }, t);
      R.push_back(dHs - dKt - poisson_bracket(model, Hst, Kst, p));
    }
    double mean = 0.0;
    for (double r : R) mean += r;
    mean /= static_cast<double>(R.size());
    out.constant = std::max(out.constant, std::abs(mean));
    for (double r : R) out.spatial_deviation = std::max(out.spatial_deviation, std::abs(r - mean));
  }
  return out;
}

/// Both sides of ∫_Λ {H,K} β = ∫_Λ (H d i_ζ β − K d i_ξ β), ξ = ξ_H, ζ = ξ_K.
struct LemmaObSides {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual() const { return std::abs(lhs - rhs); }
};

inline LemmaObSides lemma_ob_sides(const LagMesh& mesh, const ScalarFunction& H, const ScalarFunction& K,
                                   const RealForm& beta) {
  const AmbientModel& m = mesh.model();
  if (beta.degree() != mesh.n()) throw DegreeError("beta must have the mesh dimension as degree");
  auto field_of = [&m](const ScalarFunction& F) {
    return [&m, F](std::span<const double> p) { return hamiltonian_vector_field(m, F, p).components; };
  };
  const auto bpull = pullback_top(mesh, beta);
  ScalarField Hv(mesh.nodes()), Kv(mesh.nodes()), lhs(mesh.nodes());
  for (std::size_t k = 0; k < mesh.nodes(); ++k) {
    const auto p = mesh.point(k);
    Hv[k] = H(p);
    Kv[k] = K(p);
    lhs[k] = poisson_bracket(m, H, K, p) * bpull[k];
  }
  const auto dzeta = grid_d_top(mesh, pullback_form(mesh, contract(field_of(K), beta)));
  const auto dxi = grid_d_top(mesh, pullback_form(mesh, contract(field_of(H), beta)));
  ScalarField rhs(mesh.nodes());
  for (std::size_t k = 0; k < mesh.nodes(); ++k) rhs[k] = Hv[k] * dzeta[k] - Kv[k] * dxi[k];
  return {integrate_density(mesh, std::span<const double>(lhs)), integrate_density(mesh, std::span<const double>(rhs))};
}

inline double lemma_ob_residual(const LagMesh& mesh, const ScalarFunction& H, const ScalarFunction& K,
                                const RealForm& beta) {
  return lemma_ob_sides(mesh, H, K, beta).residual();
}

}  // namespace lagcal
