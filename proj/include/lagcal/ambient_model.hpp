#pragma once
// Flat model manifolds: symplectic form, optional complex structure,
// holomorphic volume form and primitives; Hamiltonian vector fields and
// Poisson brackets.
//
// Sign conventions:
//   i_ξ ω = dH                    (Hamiltonian vector field of H)
//   {H, K} = ξ_H K = ω(ξ_K, ξ_H)  (Poisson bracket)
//   g(ξ, ζ) = ω(ξ, Jζ)            (Kähler metric)

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lagcal/expression.hpp"
#include "lagcal/form.hpp"

namespace lagcal {

class SingularFormError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Time-dependent real function on the ambient space, with an optional
/// analytic spatial gradient (centered differences otherwise).
class ScalarFunction {
 public:
  using ValueFn = std::function<double(double, std::span<const double>)>;
  using GradientFn = std::function<void(double, std::span<const double>, std::span<double>)>;

  static constexpr double kGradientStep = 2e-6;

  ScalarFunction() : value_([](double, std::span<const double>) { return 0.0; }) {
    gradient_ = [](double, std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); };
  }
  explicit ScalarFunction(ValueFn value, GradientFn gradient = {})
      : value_(std::move(value)), gradient_(std::move(gradient)) {}

  /// Expression in the variables (t, coordinates...).
  static ScalarFunction from_expression(const std::string& text, const std::vector<std::string>& coordinates) {
    std::vector<std::string> vars{"t"};
    vars.insert(vars.end(), coordinates.begin(), coordinates.end());
    Expression e(text, vars);
    auto pack = [](double t, std::span<const double> p) {
      std::array<double, kMaxExpressionVars> v{};
      v[0] = t;
      std::copy(p.begin(), p.end(), v.begin() + 1);
      return v;
    };
    return ScalarFunction(
        [e, pack](double t, std::span<const double> p) {
          const auto v = pack(t, p);
          return e(std::span<const double>(v.data(), p.size() + 1));
        },
        [e, pack](double t, std::span<const double> p, std::span<double> g) {
          const auto v = pack(t, p);
          std::array<double, kMaxExpressionVars> full{};
          e.value_and_gradient(std::span<const double>(v.data(), p.size() + 1),
                               std::span<double>(full.data(), p.size() + 1));
          std::copy(full.begin() + 1, full.begin() + 1 + p.size(), g.begin());
        });
  }

  static ScalarFunction from_static_expression(const std::string& text, const std::vector<std::string>& coordinates) {
    return from_expression(text, coordinates);
  }

  double operator()(double t, std::span<const double> p) const { return value_(t, p); }
  double operator()(std::span<const double> p) const { return value_(0.0, p); }

  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }

  void gradient(double t, std::span<const double> p, std::span<double> g) const {
    if (gradient_) {
      gradient_(t, p, g);
      return;
    }
    std::vector<double> q(p.begin(), p.end());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double h = kGradientStep * std::max(1.0, std::abs(p[i]));
      q[i] = p[i] + h;
      const double fp = value_(t, q);
      q[i] = p[i] - h;
      const double fm = value_(t, q);
      q[i] = p[i];
      g[i] = (fp - fm) / (2.0 * h);
    }
  }

  std::vector<double> gradient(double t, std::span<const double> p) const {
    std::vector<double> g(p.size());
    gradient(t, p, g);
    return g;
  }

  /// The function as a 0-form at fixed time.
  RealForm as_form(int dim, double t = 0.0) const {
    ScalarFunction self = *this;
    auto d = std::make_shared<const RealForm>(RealForm(dim, 1, [self, dim, t](std::span<const double> p) {
      FormValue<double> v(dim, 1);
      std::vector<double> g(dim);
      self.gradient(t, p, g);
      for (int i = 0; i < dim; ++i) v[Mask(1) << i] = g[i];
      return v;
    }));
    return RealForm(dim, 0, [self, dim, t](std::span<const double> p) {
      return FormValue<double>::scalar(dim, self(t, p));
    }, d);
  }

 private:
  ValueFn value_;
  GradientFn gradient_;
};

enum class ChartKind { Euclidean, Torus };

struct AmbientModel {
  std::string name;
  int dim = 2;
  ChartKind chart = ChartKind::Euclidean;
  std::vector<double> periods;  // torus charts only
  std::vector<std::string> coordinates;

  RealForm omega = RealForm::zero(2, 2);
  std::optional<Eigen::MatrixXd> complex_structure;  // J, column j = J e_j
  std::optional<ComplexForm> holo_volume;            // Ω
  std::optional<RealForm> liouville_primitive;       // λ, dλ = ω
  std::optional<RealForm> beta;                      // designated closed n-form with ω ∧ β = 0
  std::optional<RealForm> gamma_primitive;           // γ, dγ = β
  std::optional<double> scaling_constant;            // c in λ ∧ β = -c ω ∧ γ

  int half_dim() const { return dim / 2; }
  bool is_torus() const { return chart == ChartKind::Torus; }

  /// β if set, otherwise im Ω.
  RealForm designated_beta() const {
    if (beta) return *beta;
    if (holo_volume) return imag_part(*holo_volume);
    throw ModelError("model '" + name + "' has neither beta nor a holomorphic volume form");
  }

  const Eigen::MatrixXd& J() const {
    if (!complex_structure) throw ModelError("model '" + name + "' has no complex structure");
    return *complex_structure;
  }

  const ComplexForm& Omega() const {
    if (!holo_volume) throw ModelError("model '" + name + "' has no holomorphic volume form");
    return *holo_volume;
  }
};

using ModelPtr = std::shared_ptr<const AmbientModel>;

/// W_ij = ω(e_i, e_j) at p.
inline Eigen::MatrixXd omega_matrix(const AmbientModel& m, std::span<const double> p) {
  const auto w = two_form_matrix(m.omega(p));
  Eigen::MatrixXd out(m.dim, m.dim);
  for (int i = 0; i < m.dim; ++i)
    for (int j = 0; j < m.dim; ++j) out(i, j) = w[i * m.dim + j];
  return out;
}

/// g_ij = g(e_i, e_j) = ω(e_i, J e_j).
inline Eigen::MatrixXd metric_matrix(const AmbientModel& m, std::span<const double> p) {
  return omega_matrix(m, p) * m.J();
}

/// Solves i_ξ ω = a for ξ given the covector a (components a_j = a(e_j)).
inline Eigen::VectorXd solve_contraction(const Eigen::MatrixXd& W, const Eigen::VectorXd& a) {
  // (i_ξ ω)_j = Σ_i ξ^i W_ij
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(W.transpose());
  const double det = lu.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-14) throw SingularFormError("symplectic form is degenerate at this point");
  return lu.solve(a);
}

inline TangentVectorAtPoint hamiltonian_vector_field(const AmbientModel& m, const ScalarFunction& H,
                                                     std::span<const double> p, double t = 0.0) {
  std::vector<double> g(m.dim);
  H.gradient(t, p, g);
  const Eigen::VectorXd xi = solve_contraction(omega_matrix(m, p), Eigen::Map<const Eigen::VectorXd>(g.data(), m.dim));
  return {std::vector<double>(p.begin(), p.end()), std::vector<double>(xi.data(), xi.data() + m.dim)};
}

/// {H, K} = ξ_H K.
inline double poisson_bracket(const AmbientModel& m, const ScalarFunction& H, const ScalarFunction& K,
                              std::span<const double> p, double t = 0.0) {
  const auto xi = hamiltonian_vector_field(m, H, p, t);
  std::vector<double> gk(m.dim);
  K.gradient(t, p, gk);
  double s = 0.0;
  for (int i = 0; i < m.dim; ++i) s += gk[i] * xi.components[i];
  return s;
}

/// Liouville vector field: i_ξ ω = λ.
inline TangentVectorAtPoint liouville_vector_field(const AmbientModel& m, std::span<const double> p) {
  if (!m.liouville_primitive) throw ModelError("model '" + m.name + "' has no Liouville primitive");
  const auto lam = (*m.liouville_primitive)(p);
  Eigen::VectorXd a(m.dim);
  for (int j = 0; j < m.dim; ++j) a[j] = lam[Mask(1) << j];
  const Eigen::VectorXd xi = solve_contraction(omega_matrix(m, p), a);
  return {std::vector<double>(p.begin(), p.end()), std::vector<double>(xi.data(), xi.data() + m.dim)};
}

/// Maximum-norm residuals of the model invariants over the sample points
/// (NaN when the ingredients are absent).
struct ModelDiagnostics {
  double omega_closed = 0.0;
  double min_abs_det_omega = std::numeric_limits<double>::infinity();
  double j_squared = std::numeric_limits<double>::quiet_NaN();
  double j_compatibility = std::numeric_limits<double>::quiet_NaN();
  double min_metric_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  double liouville_residual = std::numeric_limits<double>::quiet_NaN();   // |dλ - ω|
  double lbog_residual = std::numeric_limits<double>::quiet_NaN();        // |λ∧β + c ω∧γ|
  double omega_wedge_beta = std::numeric_limits<double>::quiet_NaN();     // |ω ∧ β|
  double gamma_residual = std::numeric_limits<double>::quiet_NaN();       // |dγ - β|
};

inline ModelDiagnostics check_model(const AmbientModel& m, const std::vector<std::vector<double>>& points,
                                    double step = kDefaultFdStep) {
  ModelDiagnostics out;
  const bool top = m.dim >= 3;
  std::optional<RealForm> domega;
  if (top) domega = exterior_derivative(m.omega, step);
  std::optional<RealForm> dlam, lbog, owb, dgam;
  std::optional<RealForm> beta;
  if (m.beta || m.holo_volume) beta = m.designated_beta();
  if (m.liouville_primitive) dlam = exterior_derivative(*m.liouville_primitive, step);
  if (beta && 2 + beta->degree() <= m.dim) owb = wedge(m.omega, *beta);
  if (m.liouville_primitive && beta && m.gamma_primitive && m.scaling_constant && beta->degree() + 1 <= m.dim)
    lbog = wedge(*m.liouville_primitive, *beta) + (*m.scaling_constant) * wedge(m.omega, *m.gamma_primitive);
  if (m.gamma_primitive && beta) dgam = exterior_derivative(*m.gamma_primitive, step);
  if (m.complex_structure) {
    out.j_squared = out.j_compatibility = 0.0;
    out.min_metric_eigenvalue = std::numeric_limits<double>::infinity();
  }
  for (const auto& p : points) {
    if (domega) out.omega_closed = std::max(out.omega_closed, (*domega)(p).max_abs());
    const Eigen::MatrixXd W = omega_matrix(m, p);
    out.min_abs_det_omega = std::min(out.min_abs_det_omega, std::abs(W.determinant()));
    if (m.complex_structure) {
      const Eigen::MatrixXd& J = *m.complex_structure;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m.dim, m.dim);
      out.j_squared = std::max(out.j_squared, (J * J + I).cwiseAbs().maxCoeff());
      out.j_compatibility = std::max(out.j_compatibility, (J.transpose() * W * J - W).cwiseAbs().maxCoeff());
      const Eigen::MatrixXd g = W * J;
      out.j_compatibility = std::max(out.j_compatibility, (g - g.transpose()).cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()));
      out.min_metric_eigenvalue = std::min(out.min_metric_eigenvalue, es.eigenvalues().minCoeff());
    }
    auto upd = [&](double& slot, double v) { slot = std::isnan(slot) ? v : std::max(slot, v); };
    if (dlam) upd(out.liouville_residual, ((*dlam)(p) - m.omega(p)).max_abs());
    if (lbog) upd(out.lbog_residual, (*lbog)(p).max_abs());
    if (owb) upd(out.omega_wedge_beta, (*owb)(p).max_abs());
    if (dgam) upd(out.gamma_residual, ((*dgam)(p) - (*beta)(p)).max_abs());
  }
  return out;
}

/// Uniform random points in the box [-r, r]^D (torus models: one fundamental domain).
inline std::vector<std::vector<double>> sample_points(const AmbientModel& m, std::size_t count, std::uint64_t seed,
                                                      double radius = 1.0) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> pts(count, std::vector<double>(m.dim));
  for (auto& p : pts) {
    for (int i = 0; i < m.dim; ++i) {
      if (m.is_torus()) {
        std::uniform_real_distribution<double> u(0.0, m.periods[i]);
        p[i] = u(rng);
      } else {
        std::uniform_real_distribution<double> u(-radius, radius);
        p[i] = u(rng);
      }
    }
  }
  return pts;
}

}  // namespace lagcal
