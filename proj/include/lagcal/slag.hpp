#pragma once
// Almost Calabi–Yau structure on meshes: ρ, phase, special defect,
// first/second variations of 𝒞 and volume, horizontal lifts, geodesics.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <deque>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lagcal/functionals.hpp"
#include "lagcal/isotopy.hpp"
#include "lagcal/lag_mesh.hpp"

namespace lagcal {

class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotCriticalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GeodesicExitError : public std::runtime_error {
 public:
  GeodesicExitError(const std::string& what, double t) : std::runtime_error(what), exit_time(t) {}
  double exit_time;
};

/// ρ with e^ρ ωⁿ/n! = (−1)^{n(n−1)/2} (i/2)ⁿ Ω∧Ω̄ at each point.
inline std::vector<double> rho_field(const AmbientModel& model, const std::vector<std::vector<double>>& points) {
  using C = std::complex<double>;
  const int n = model.half_dim();
  const ComplexForm& Om = model.Omega();
  const RealForm wn = wedge_power(model.omega, n);
  double nfact = 1.0;
  for (int i = 2; i <= n; ++i) nfact *= i;
  const C pref = std::pow(C(0.0, 0.5), n) * ((n * (n - 1) / 2) % 2 ? -1.0 : 1.0);
  const Mask top = (Mask(1) << model.dim) - 1;
  std::vector<double> out;
  for (const auto& p : points) {
    const auto o = Om(p);
    const C rhs = pref * wedge(o, conjugate(o))[top];
    const double lhs = wn(p)[top] / nfact;
    const C ratio = rhs / lhs;
    if (!(ratio.real() > 0.0) || std::abs(ratio.imag()) > 1e-10 * std::abs(ratio))
      throw StructureError("holomorphic volume and symplectic form are inconsistent (non-positive ratio)");
    out.push_back(std::log(ratio.real()));
  }
  return out;
}

struct PhaseData {
  ScalarField theta;                  // continuous branch, anchored at node 0
  ScalarField rho;                    // ρ at the mesh nodes
  std::vector<std::complex<double>> omega_frame;  // Ω(∂_1 f, …, ∂_n f) · orientation
  std::vector<int> winding;           // per torus axis, in multiples of 2π
  double cos_floor = kDefaultCosFloor;
};

inline PhaseData phase_field(const LagMesh& mesh, double cos_floor = kDefaultCosFloor) {
  const auto& m = mesh.model();
  PhaseData pd;
  pd.cos_floor = cos_floor;
  pd.omega_frame = pullback_top(mesh, m.Omega());
  for (auto& z : pd.omega_frame) {
    z *= double(mesh.orientation());
    if (std::abs(z) < 1e-12) throw DegenerateImmersionError("holomorphic volume vanishes on the tangent frame");
  }
  std::vector<std::vector<double>> pts;
  for (std::size_t k = 0; k < mesh.nodes(); ++k) pts.emplace_back(mesh.point(k).begin(), mesh.point(k).end());
  pd.rho = rho_field(m, pts);

  const Grid& g = mesh.grid();
  const std::size_t N = mesh.nodes();
  pd.theta.assign(N, 0.0);
  std::vector<char> seen(N, 0);
  std::deque<std::size_t> queue{0};
  seen[0] = 1;
  pd.theta[0] = std::arg(pd.omega_frame[0]);
  auto step_to = [&](double from, std::complex<double> z) {
    double d = std::arg(z) - from;
    d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
    return from + d;
  };
  while (!queue.empty()) {
    const std::size_t k = queue.front();
    queue.pop_front();
    const auto idx = g.unravel(k);
    for (int a = 0; a < g.n(); ++a)
      for (int dir : {-1, 1}) {
        std::array<int, kMaxParamDim> j = idx;
        j[a] += dir;
        if (!g.is_torus() && (j[a] < 0 || j[a] >= g.count(a))) continue;
        const std::size_t nb = g.node_of(std::span<const int>(j.data(), g.n()));
        if (seen[nb]) continue;
        seen[nb] = 1;
        pd.theta[nb] = step_to(pd.theta[k], pd.omega_frame[nb]);
        queue.push_back(nb);
      }
  }
  if (g.is_torus()) {
    for (int a = 0; a < g.n(); ++a) {
      double acc = 0.0;
      double cur = std::arg(pd.omega_frame[0]);
      std::array<int, kMaxParamDim> j{};
      for (int i = 1; i <= g.count(a); ++i) {
        j[a] = i;
        const auto z = pd.omega_frame[g.node_of(std::span<const int>(j.data(), g.n()))];
        const double next = step_to(cur, z);
        acc += next - cur;
        cur = next;
      }
      pd.winding.push_back(static_cast<int>(std::lround(acc / (2.0 * std::numbers::pi))));
    }
  }
  return pd;
}

/// Grid differential of θ, computed as Im(dΩ_f / Ω_f) (unaffected by winding).
inline MeshOneForm phase_differential(const LagMesh& mesh, const PhaseData& pd) {
  MeshOneForm out{mesh.n(), std::vector<double>(mesh.nodes() * mesh.n())};
  ScalarField re(mesh.nodes()), im(mesh.nodes());
  for (std::size_t k = 0; k < mesh.nodes(); ++k) {
    re[k] = pd.omega_frame[k].real();
    im[k] = pd.omega_frame[k].imag();
  }
  for (int a = 0; a < mesh.n(); ++a) {
    const auto dre = mesh.grid().derivative(re, a);
    const auto dim = mesh.grid().derivative(im, a);
    for (std::size_t k = 0; k < mesh.nodes(); ++k) {
      const std::complex<double> dz(dre[k], dim[k]);
      out(k, a) = (dz / pd.omega_frame[k]).imag();
    }
  }
  return out;
}

/// max |im Ω(frame)| / |Ω(frame)|.
inline double special_defect(const LagMesh& mesh) {
  const auto om = pullback_top(mesh, mesh.model().Omega());
  double m = 0.0;
  for (const auto& z : om) {
    const double a = std::abs(z);
    if (a < 1e-12) throw DegenerateImmersionError("holomorphic volume vanishes on the tangent frame");
    m = std::max(m, std::abs(z.imag()) / a);
  }
  return m;
}

/// Max over nodes of |(re Ω_f)² + (im Ω_f)² − e^ρ (vol density)²|, relative to e^ρ vol².
inline double calibration_identity_residual(const LagMesh& mesh) {
  const auto pd = phase_field(mesh);
  const auto vol = induced_volume(mesh);
  double m = 0.0;
  for (std::size_t k = 0; k < mesh.nodes(); ++k) {
    const double rhs = std::exp(pd.rho[k]) * vol[k] * vol[k];
    m = std::max(m, std::abs(std::norm(pd.omega_frame[k]) - rhs) / rhs);
  }
  return m;
}

/// ∫_Λ k · im Ω.
inline double cc_first_variation(const LagMesh& mesh, std::span<const double> k) {
  return integrate_weighted(mesh, k, imag_part(mesh.model().Omega()));
}

namespace detail {

struct MetricData {
  std::vector<Eigen::MatrixXd> Ginv;
  ScalarField sqrt_det;
};

inline MetricData metric_data(const LagMesh& mesh) {
  MetricData md;
  for (std::size_t k = 0; k < mesh.nodes(); ++k) {
    const Eigen::MatrixXd G = induced_metric(mesh, k);
    md.sqrt_det.push_back(std::sqrt(std::max(G.determinant(), 0.0)));
    md.Ginv.push_back(G.inverse());
  }
  return md;
}

/// |dk|²_g per node.
inline ScalarField gradient_norm_sq(const LagMesh& mesh, const MetricData& md, std::span<const double> k) {
  const auto dk = grid_gradient(mesh, k);
  ScalarField out(mesh.nodes());
  for (std::size_t i = 0; i < mesh.nodes(); ++i) {
    double s = 0.0;
    for (int a = 0; a < mesh.n(); ++a)
      for (int b = 0; b < mesh.n(); ++b) s += md.Ginv[i](a, b) * dk(i, a) * dk(i, b);
    out[i] = s;
  }
  return out;
}

/// Divergence-form Laplace–Beltrami: (1/√G) ∂_a(√G G^{ab} ∂_b h).
inline ScalarField laplace_beltrami(const LagMesh& mesh, const MetricData& md, std::span<const double> h) {
  const auto dh = grid_gradient(mesh, h);
  ScalarField out(mesh.nodes(), 0.0);
  for (int a = 0; a < mesh.n(); ++a) {
    ScalarField flux(mesh.nodes());
    for (std::size_t i = 0; i < mesh.nodes(); ++i) {
      double s = 0.0;
      for (int b = 0; b < mesh.n(); ++b) s += md.Ginv[i](a, b) * dh(i, b);
      flux[i] = md.sqrt_det[i] * s;
    }
    const auto d = mesh.grid().derivative(flux, a);
    for (std::size_t i = 0; i < mesh.nodes(); ++i) out[i] += d[i];
  }
  for (std::size_t i = 0; i < mesh.nodes(); ++i) out[i] /= md.sqrt_det[i];
  return out;
}

inline double integrate_plain(const LagMesh& mesh, const ScalarField& f) {
  const auto& w = mesh.grid().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i];
  return s;
}

}  // namespace detail

/// ∫_Λ |dk|² e^{ρ/2} vol; valid only at special Lagrangians.
inline double cc_second_variation_critical(const LagMesh& mesh, std::span<const double> k, double critical_tol = 1e-8) {
  const double sd = special_defect(mesh);
  if (sd >= critical_tol) {
    std::ostringstream os;
    os << "mesh is not special Lagrangian (defect " << sd
       << "); the critical-point formula does not apply, use finite differences of cc_invariant";
    throw NotCriticalError(os.str());
  }
  const auto pd = phase_field(mesh);
  const auto md = detail::metric_data(mesh);
  auto f = detail::gradient_norm_sq(mesh, md, k);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= std::exp(0.5 * pd.rho[i]) * md.sqrt_det[i];
  return detail::integrate_plain(mesh, f);
}

/// ∫ ⟨dh, dθ⟩ vol.
inline double vol_first_variation(const LagMesh& mesh, std::span<const double> h) {
  const auto pd = phase_field(mesh);
  const auto dth = phase_differential(mesh, pd);
  const auto dh = grid_gradient(mesh, h);
  const auto md = detail::metric_data(mesh);
  ScalarField f(mesh.nodes());
  for (std::size_t i = 0; i < mesh.nodes(); ++i) {
    double s = 0.0;
    for (int a = 0; a < mesh.n(); ++a)
      for (int b = 0; b < mesh.n(); ++b) s += md.Ginv[i](a, b) * dh(i, a) * dth(i, b);
    f[i] = s * md.sqrt_det[i];
  }
  return detail::integrate_plain(mesh, f);
}

/// max |Δ θ| (harmonicity of dθ in the sense needed for the second variation).
inline double phase_laplacian(const LagMesh& mesh) {
  const auto pd = phase_field(mesh);
  const auto dth = phase_differential(mesh, pd);
  const auto md = detail::metric_data(mesh);
  ScalarField out(mesh.nodes(), 0.0);
  for (int a = 0; a < mesh.n(); ++a) {
    ScalarField flux(mesh.nodes());
    for (std::size_t i = 0; i < mesh.nodes(); ++i) {
      double s = 0.0;
      for (int b = 0; b < mesh.n(); ++b) s += md.Ginv[i](a, b) * dth(i, b);
      flux[i] = md.sqrt_det[i] * s;
    }
    const auto d = mesh.grid().derivative(flux, a);
    for (std::size_t i = 0; i < mesh.nodes(); ++i) out[i] += d[i] / md.sqrt_det[i];
  }
  double m = 0.0;
  for (double v : out) m = std::max(m, std::abs(v));
  return m;
}

/// ∫ |Δh|² vol at a critical point of the volume.
inline double vol_second_variation(const LagMesh& mesh, std::span<const double> h, double harmonic_tol = 1e-6) {
  const double lap = phase_laplacian(mesh);
  if (lap > harmonic_tol) {
    std::ostringstream os;
    os << "phase is not harmonic (max |Δθ| = " << lap << "); the critical-point formula does not apply";
    throw NotCriticalError(os.str());
  }
  const auto md = detail::metric_data(mesh);
  auto f = detail::laplace_beltrami(mesh, md, h);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = f[i] * f[i] * md.sqrt_det[i];
  return detail::integrate_plain(mesh, f);
}

struct HorizontalVelocity {
  std::vector<double> v;         // nodes x D
  double omega_residual = 0.0;   // max |pullback(i_v ω) − dh|
  double re_omega_residual = 0.0;  // max |pullback(i_v re Ω)|
};

/// Tangential induced-metric gradient of h pushed to ambient coordinates.
inline std::vector<double> ambient_gradient(const LagMesh& mesh, std::span<const double> h) {
  const auto dh = grid_gradient(mesh, h);
  const int D = mesh.D(), n = mesh.n();
  std::vector<double> out(mesh.nodes() * D, 0.0);
  for (std::size_t i = 0; i < mesh.nodes(); ++i) {
    const Eigen::MatrixXd Ginv = induced_metric(mesh, i).inverse();
    for (int a = 0; a < n; ++a) {
      double c = 0.0;
      for (int b = 0; b < n; ++b) c += Ginv(a, b) * dh(i, b);
      const auto f = mesh.frame(i, a);
      for (int d = 0; d < D; ++d) out[i * D + d] += c * f[d];
    }
  }
  return out;
}

/// Mesh displaced by eps · (−J∇h): the first-order normal variation generated by h.
inline LagMesh linear_lift(const LagMesh& mesh, std::span<const double> h, double eps) {
  const auto grad = ambient_gradient(mesh, h);
  const Eigen::MatrixXd& J = mesh.model().J();
  const int D = mesh.D();
  std::vector<double> x = mesh.positions();
  for (std::size_t i = 0; i < mesh.nodes(); ++i) {
    Eigen::Map<const Eigen::VectorXd> g(grad.data() + i * D, D);
    const Eigen::VectorXd w = -(J * g);
    for (int d = 0; d < D; ++d) x[i * D + d] += eps * w[d];
  }
  return mesh.with_positions(x);
}

/// v = −J∇h − tan θ ∇h.
inline HorizontalVelocity horizontal_velocity(const LagMesh& mesh, std::span<const double> h,
                                              double cos_floor = kDefaultCosFloor, bool with_residuals = true) {
  const auto& m = mesh.model();
  cos_phase(mesh, cos_floor);
  const auto pd_frame = pullback_top(mesh, m.Omega());
  const auto grad = ambient_gradient(mesh, h);
  const int D = mesh.D();
  const Eigen::MatrixXd& J = m.J();
  HorizontalVelocity out;
  out.v.assign(grad.size(), 0.0);
  for (std::size_t i = 0; i < mesh.nodes(); ++i) {
    const std::complex<double> z = pd_frame[i] * double(mesh.orientation());
    const double tan_theta = z.imag() / z.real();
    Eigen::Map<const Eigen::VectorXd> g(grad.data() + i * D, D);
    const Eigen::VectorXd v = -(J * g) - tan_theta * g;
    for (int d = 0; d < D; ++d) out.v[i * D + d] = v[d];
  }
  if (with_residuals) {
    const auto alpha = velocity_one_form(mesh, out.v);
    const auto dh = grid_gradient(mesh, h);
    for (std::size_t i = 0; i < alpha.components.size(); ++i)
      out.omega_residual = std::max(out.omega_residual, std::abs(alpha.components[i] - dh.components[i]));
    const RealForm reO = real_part(m.Omega());
    const int n = mesh.n();
    std::vector<std::span<const double>> vecs(n - 1);
    for (std::size_t i = 0; i < mesh.nodes(); ++i) {
      const auto contracted = interior(std::span<const double>(out.v.data() + i * D, D), reO(mesh.point(i)));
      for (int skip = 0; skip < n; ++skip) {
        int q = 0;
        for (int a = 0; a < n; ++a)
          if (a != skip) vecs[q++] = mesh.frame(i, a);
        const double val = evaluate(contracted, std::span<const std::span<const double>>(vecs));
        out.re_omega_residual = std::max(out.re_omega_residual, std::abs(val));
      }
    }
  }
  return out;
}

struct Geodesic {
  IsotopyPath path;
  ScalarField generator;  // node-indexed h, constant along the path
  std::function<double(double)> speed;  // time profile multiplying the horizontal field
};

/// RK4 transport of the nodes along speed(t) · horizontal_velocity(·, h) with
/// node values of h held fixed.
inline Geodesic geodesic_shoot(const LagMesh& mesh0, ScalarField h, double T, int steps,
                               double cos_floor = kDefaultCosFloor,
                               std::function<double(double)> speed = nullptr) {
  if (steps < 1) throw PathError("geodesic needs at least one step");
  if (h.size() != mesh0.nodes()) throw MeshError("generator does not match mesh");
  if (!speed) speed = [](double) { return 1.0; };
  Geodesic g;
  g.generator = h;
  g.speed = speed;
  cos_phase(mesh0, cos_floor);
  g.path.times.push_back(0.0);
  g.path.meshes.push_back(mesh0);
  const double dt = T / steps;
  auto field = [&](double t, const std::vector<double>& x) {
    const LagMesh m = mesh0.with_positions(x);
    auto hv = horizontal_velocity(m, h, cos_floor, false).v;
    const double s = speed(t);
    for (auto& v : hv) v *= s;
    return hv;
  };
  std::vector<double> x = mesh0.positions();
  for (int i = 0; i < steps; ++i) {
    const double t = i * dt;
    std::vector<double> y;
    try {
      const auto k1 = field(t, x);
      std::vector<double> tmp(x.size());
      for (std::size_t q = 0; q < x.size(); ++q) tmp[q] = x[q] + 0.5 * dt * k1[q];
      const auto k2 = field(t + 0.5 * dt, tmp);
      for (std::size_t q = 0; q < x.size(); ++q) tmp[q] = x[q] + 0.5 * dt * k2[q];
      const auto k3 = field(t + 0.5 * dt, tmp);
      for (std::size_t q = 0; q < x.size(); ++q) tmp[q] = x[q] + dt * k3[q];
      const auto k4 = field(t + dt, tmp);
      y.resize(x.size());
      for (std::size_t q = 0; q < x.size(); ++q) y[q] = x[q] + dt / 6.0 * (k1[q] + 2 * k2[q] + 2 * k3[q] + k4[q]);
      cos_phase(mesh0.with_positions(y), cos_floor);
    } catch (const NotAlmostCalibratedError& e) {
      std::ostringstream os;
      os << "geodesic left the almost-calibrated set near t = " << t << " (" << e.what() << ")";
      throw GeodesicExitError(os.str(), t);
    }
    x = std::move(y);
    g.path.times.push_back(i + 1 == steps ? T : t + dt);
    g.path.meshes.push_back(mesh0.with_positions(x));
  }
  g.path.segments = {{0, g.path.meshes.size() - 1}};
  return g;
}

/// ∫_{Λ_s} |dk|² / cos θ · e^{ρ/2} vol at sample j of the geodesic.
inline double geodesic_cc_convexity(const Geodesic& geo, std::size_t j, double cos_floor = kDefaultCosFloor) {
  const LagMesh& mesh = geo.path.meshes.at(j);
  const auto c = cos_phase(mesh, cos_floor);
  const auto pd = phase_field(mesh, cos_floor);
  const auto md = detail::metric_data(mesh);
  ScalarField k = geo.generator;
  if (geo.speed) {
    const double s = geo.speed(geo.path.times[j]);
    for (auto& v : k) v *= s;
  }
  auto f = detail::gradient_norm_sq(mesh, md, k);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= std::exp(0.5 * pd.rho[i]) * md.sqrt_det[i] / c[i];
  return detail::integrate_plain(mesh, f);
}

struct StationarityResult {
  double derivative = 0.0;  // central difference dE/ds at s = 0
  double energy_plus = 0.0;
  double energy_minus = 0.0;
};

/// Central-difference dE/ds at s = 0 for Λ^s_t = flow of Λ_t by P(t, ·) for time s.
inline StationarityResult energy_stationarity_residual(const IsotopyPath& path, const ScalarFunction& P, double ds = 1e-3,
                                                       int substeps = 4, double cos_floor = kDefaultCosFloor,
                                                       double endpoint_tol = 1e-12) {
  path.validate();
  for (std::size_t j : {std::size_t(0), path.size() - 1}) {
    const LagMesh& m = path.meshes[j];
    for (std::size_t k = 0; k < m.nodes(); ++k) {
      const double v = P(path.times[j], m.point(k));
      if (std::abs(v) > endpoint_tol) {
        std::ostringstream os;
        os << "perturbation does not vanish at the endpoint t = " << path.times[j] << " (value " << v << ")";
        throw PreconditionError(os.str());
      }
    }
  }
  auto perturbed = [&](double s) {
    IsotopyPath q = path;
    q.generator.reset();
    q.velocity = nullptr;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double t = path.times[j];
      const ModelPtr mp = path.meshes[j].model_ptr();
      const HamiltonianFamily Pt{ScalarFunction([P, t](double, std::span<const double> p) { return P(t, p); },
                                                [P, t](double, std::span<const double> p, std::span<double> g) {
                                                  P.gradient(t, p, g);
                                                })};
      q.meshes[j] = flow_mesh(path.meshes[j], hamiltonian_velocity(mp, Pt), 0.0, s, substeps);
    }
    return energy(q, cos_floor);
  };
  StationarityResult r;
  r.energy_plus = perturbed(ds);
  r.energy_minus = perturbed(-ds);
  r.derivative = (r.energy_plus - r.energy_minus) / (2.0 * ds);
  return r;
}

}  // namespace lagcal
