#pragma once
// Discretized parametrized Lagrangians: immersion values on a parameter grid,
// tangent frames, pullbacks and quadrature.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lagcal/ambient_model.hpp"
#include "lagcal/grid.hpp"

namespace lagcal {

class DegenerateImmersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MeshError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One real per mesh node.
using ScalarField = std::vector<double>;

/// Per node, n covector components in grid coordinates (node-major).
struct MeshOneForm {
  int n = 1;
  std::vector<double> components;

  std::size_t nodes() const { return components.size() / n; }
  double operator()(std::size_t node, int axis) const { return components[node * n + axis]; }
  double& operator()(std::size_t node, int axis) { return components[node * n + axis]; }

  /// Component along one axis as a scalar field.
  ScalarField axis_field(int axis) const {
    ScalarField f(nodes());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = components[k * n + axis];
    return f;
  }
};

class LagMesh {
 public:
  /// positions: nodes x D, row-major, in the ambient cover. wraps[a] is the
  /// ambient translation picked up going once around torus axis a.
  LagMesh(ModelPtr model, Grid grid, std::vector<double> positions, std::vector<std::vector<double>> wraps = {},
          int orientation = 1, std::shared_ptr<const std::vector<double>> reference = nullptr)
      : model_(std::move(model)),
        grid_(std::move(grid)),
        pos_(std::make_shared<const std::vector<double>>(std::move(positions))),
        wraps_(std::move(wraps)),
        orientation_(orientation),
        reference_(std::move(reference)) {
    if (!model_) throw MeshError("mesh needs an ambient model");
    if (orientation_ != 1 && orientation_ != -1) throw MeshError("orientation must be +1 or -1");
    if (grid_.n() * 2 != model_->dim) throw MeshError("grid dimension must be half the ambient dimension");
    if (pos_->size() != grid_.nodes() * model_->dim) throw MeshError("position array does not match grid");
    if (grid_.is_torus()) {
      if (wraps_.empty()) wraps_.assign(grid_.n(), std::vector<double>(model_->dim, 0.0));
      if (static_cast<int>(wraps_.size()) != grid_.n()) throw MeshError("need one wrap vector per torus axis");
      for (const auto& w : wraps_)
        if (static_cast<int>(w.size()) != model_->dim) throw MeshError("wrap vector has wrong dimension");
    } else {
      wraps_.clear();
      if (!reference_) reference_ = pos_;
      if (reference_->size() != pos_->size()) throw MeshError("reference immersion does not match grid");
    }
    for (double v : *pos_)
      if (!std::isfinite(v)) throw MeshError("non-finite immersion value");
    compute_frames();
  }

  /// Immersion from a parametrization u -> f(u).
  static LagMesh from_map(ModelPtr model, Grid grid,
                          const std::function<void(std::span<const double>, std::span<double>)>& f,
                          std::vector<std::vector<double>> wraps = {}, int orientation = 1) {
    const int D = model->dim;
    std::vector<double> pos(grid.nodes() * D);
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
      const auto u = grid.params(k);
      f(u, std::span<double>(pos.data() + k * D, D));
    }
    return LagMesh(std::move(model), std::move(grid), std::move(pos), std::move(wraps), orientation);
  }

  /// Same grid, model, wraps, orientation and frozen reference; new positions.
  LagMesh with_positions(std::vector<double> positions) const {
    return LagMesh(model_, grid_, std::move(positions), wraps_, orientation_, reference_);
  }

  const AmbientModel& model() const { return *model_; }
  const ModelPtr& model_ptr() const { return model_; }
  const Grid& grid() const { return grid_; }
  int D() const { return model_->dim; }
  int n() const { return grid_.n(); }
  std::size_t nodes() const { return grid_.nodes(); }
  int orientation() const { return orientation_; }
  const std::vector<std::vector<double>>& wraps() const { return wraps_; }
  const std::vector<double>& positions() const { return *pos_; }
  const std::vector<double>& reference() const { return *reference_; }
  bool has_reference() const { return static_cast<bool>(reference_); }

  std::span<const double> point(std::size_t node) const { return {pos_->data() + node * D(), std::size_t(D())}; }

  /// ∂f/∂u_axis at node.
  std::span<const double> frame(std::size_t node, int axis) const {
    return {frames_->data() + (node * n() + axis) * D(), std::size_t(D())};
  }

  /// Max deviation from the frozen reference on the collar (box grids).
  double collar_deviation() const {
    if (grid_.is_torus()) return 0.0;
    double m = 0.0;
    for (std::size_t k = 0; k < nodes(); ++k)
      if (grid_.in_collar(k))
        for (int c = 0; c < D(); ++c) m = std::max(m, std::abs((*pos_)[k * D() + c] - (*reference_)[k * D() + c]));
    return m;
  }

  /// Derivatives along every axis of an ambient-valued nodal field laid out
  /// like the positions (wrap jumps apply only when `with_wraps`).
  std::vector<double> differentiate_vector_field(const std::vector<double>& field, bool with_wraps) const {
    const int d = D(), nn = n();
    std::vector<double> out(nodes() * nn * d);
    std::vector<double> comp(nodes());
    for (int c = 0; c < d; ++c) {
      for (std::size_t k = 0; k < nodes(); ++k) comp[k] = field[k * d + c];
      for (int a = 0; a < nn; ++a) {
        const double jump = (with_wraps && grid_.is_torus()) ? wraps_[a][c] : 0.0;
        const auto der = grid_.derivative(comp, a, jump);
        for (std::size_t k = 0; k < nodes(); ++k) out[(k * nn + a) * d + c] = der[k];
      }
    }
    return out;
  }

 private:
  void compute_frames() { frames_ = std::make_shared<const std::vector<double>>(differentiate_vector_field(*pos_, true)); }

  ModelPtr model_;
  Grid grid_;
  std::shared_ptr<const std::vector<double>> pos_;
  std::vector<std::vector<double>> wraps_;
  int orientation_ = 1;
  std::shared_ptr<const std::vector<double>> reference_;
  std::shared_ptr<const std::vector<double>> frames_;
};

inline std::vector<TangentVectorAtPoint> tangent_frame(const LagMesh& mesh, std::size_t node) {
  if (node >= mesh.nodes()) throw MeshError("node index out of range");
  std::vector<TangentVectorAtPoint> out;
  Eigen::MatrixXd F(mesh.D(), mesh.n());
  for (int a = 0; a < mesh.n(); ++a) {
    const auto v = mesh.frame(node, a);
    out.push_back({std::vector<double>(mesh.point(node).begin(), mesh.point(node).end()),
                   std::vector<double>(v.begin(), v.end())});
    for (int c = 0; c < mesh.D(); ++c) F(c, a) = v[c];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(F);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= 1e-10 * std::max(1.0, s(0)))
    throw DegenerateImmersionError("tangent frame is rank deficient at node " + std::to_string(node));
  return out;
}

/// max over nodes and axis pairs of |ω(∂_a f, ∂_b f)|.
inline double lagrangian_defect(const LagMesh& mesh) {
  double m = 0.0;
  for (std::size_t k = 0; k < mesh.nodes(); ++k) {
    const auto w = two_form_matrix(mesh.model().omega(mesh.point(k)));
    const int d = mesh.D();
    for (int a = 0; a < mesh.n(); ++a)
      for (int b = a + 1; b < mesh.n(); ++b) {
        const auto fa = mesh.frame(k, a), fb = mesh.frame(k, b);
        double s = 0.0;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) s += fa[i] * w[i * d + j] * fb[j];
        m = std::max(m, std::abs(s));
      }
  }
  return m;
}

/// a(∂_1 f, ..., ∂_n f) at every node (orientation not applied).
template <class T>
std::vector<T> pullback_top(const LagMesh& mesh, const Form<T>& a) {
  if (a.degree() != mesh.n()) throw DegreeError("pullback_top: form degree must equal the mesh dimension");
  if (a.dim() != mesh.D()) throw DegreeError("pullback_top: ambient dimension mismatch");
  std::vector<T> out(mesh.nodes());
  std::vector<std::span<const double>> vecs(mesh.n());
  for (std::size_t k = 0; k < mesh.nodes(); ++k) {
    for (int i = 0; i < mesh.n(); ++i) vecs[i] = mesh.frame(k, i);
    out[k] = evaluate(a(mesh.point(k)), std::span<const std::span<const double>>(vecs));
  }
  return out;
}

/// Σ_k w_k f_k with the grid quadrature weights and the mesh orientation.
template <class T>
T integrate_density(const LagMesh& mesh, std::span<const T> f) {
  const auto& w = mesh.grid().weights();
  T s{};
  for (std::size_t k = 0; k < f.size(); ++k) s += w[k] * f[k];
  return T(mesh.orientation()) * s;
}

template <class T>
T integrate_top_form(const LagMesh& mesh, const Form<T>& a) {
  const auto v = pullback_top(mesh, a);
  return integrate_density(mesh, std::span<const T>(v));
}

/// ∫ h · a over the mesh for a scalar field h and an n-form a.
template <class T>
T integrate_weighted(const LagMesh& mesh, std::span<const double> h, const Form<T>& a) {
  auto v = pullback_top(mesh, a);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] *= h[k];
  return integrate_density(mesh, std::span<const T>(v));
}

/// Induced metric on the grid directions at node: G_ab = g(∂_a f, ∂_b f).
inline Eigen::MatrixXd induced_metric(const LagMesh& mesh, std::size_t node) {
  const Eigen::MatrixXd g = metric_matrix(mesh.model(), mesh.point(node));
  Eigen::MatrixXd F(mesh.D(), mesh.n());
  for (int a = 0; a < mesh.n(); ++a) {
    const auto v = mesh.frame(node, a);
    for (int c = 0; c < mesh.D(); ++c) F(c, a) = v[c];
  }
  return F.transpose() * g * F;
}

/// √det G per node.
inline ScalarField induced_volume(const LagMesh& mesh) {
  if (!mesh.model().complex_structure) throw ModelError("induced volume needs a complex structure");
  ScalarField out(mesh.nodes());
  for (std::size_t k = 0; k < mesh.nodes(); ++k) {
    const double det = induced_metric(mesh, k).determinant();
    out[k] = std::sqrt(std::max(det, 0.0));
  }
  return out;
}

/// Pullback of an ambient 1-form to grid coordinates.
inline MeshOneForm pullback_one_form(const LagMesh& mesh, const RealForm& a) {
  if (a.degree() != 1) throw DegreeError("pullback_one_form: need a 1-form");
  MeshOneForm out{mesh.n(), std::vector<double>(mesh.nodes() * mesh.n())};
  for (std::size_t k = 0; k < mesh.nodes(); ++k) {
    const auto v = a(mesh.point(k));
    for (int ax = 0; ax < mesh.n(); ++ax) {
      const auto f = mesh.frame(k, ax);
      double s = 0.0;
      for (int c = 0; c < mesh.D(); ++c) s += v[Mask(1) << c] * f[c];
      out(k, ax) = s;
    }
  }
  return out;
}

/// Grid differential of a scalar field.
inline MeshOneForm grid_gradient(const LagMesh& mesh, std::span<const double> h) {
  MeshOneForm out{mesh.n(), std::vector<double>(mesh.nodes() * mesh.n())};
  for (int a = 0; a < mesh.n(); ++a) {
    const auto d = mesh.grid().derivative(h, a);
    for (std::size_t k = 0; k < mesh.nodes(); ++k) out(k, a) = d[k];
  }
  return out;
}

/// max |∂_a α_b − ∂_b α_a| over nodes (0 for n = 1).
inline double closedness_residual(const LagMesh& mesh, const MeshOneForm& alpha) {
  double m = 0.0;
  for (int a = 0; a < mesh.n(); ++a)
    for (int b = a + 1; b < mesh.n(); ++b) {
      const auto dab = mesh.grid().derivative(alpha.axis_field(b), a);
      const auto dba = mesh.grid().derivative(alpha.axis_field(a), b);
      for (std::size_t k = 0; k < mesh.nodes(); ++k) m = std::max(m, std::abs(dab[k] - dba[k]));
    }
  return m;
}

/// Pullback of an ambient k-form to the grid: coefficient of du^I for every
/// increasing multi-index I of grid axes (bitmask over n axes), per node.
inline std::vector<FormValue<double>> pullback_form(const LagMesh& mesh, const RealForm& a) {
  const int n = mesh.n(), k = a.degree();
  if (k > n) throw DegreeError("pullback_form: degree exceeds mesh dimension");
  std::vector<FormValue<double>> out(mesh.nodes(), FormValue<double>(n, k));
  std::vector<std::span<const double>> vecs(k);
  for (std::size_t node = 0; node < mesh.nodes(); ++node) {
    const auto v = a(mesh.point(node));
    for (Mask m = 0; m < (Mask(1) << n); ++m) {
      if (std::popcount(m) != k) continue;
      int j = 0;
      for (Mask rest = m; rest; rest &= rest - 1) vecs[j++] = mesh.frame(node, std::countr_zero(rest));
      out[node][m] = evaluate(v, std::span<const std::span<const double>>(vecs));
    }
  }
  return out;
}

/// Grid exterior derivative of a nodal (n−1)-form; returns the du^1∧…∧du^n coefficient.
inline ScalarField grid_d_top(const LagMesh& mesh, const std::vector<FormValue<double>>& b) {
  const int n = mesh.n();
  const Mask full = (Mask(1) << n) - 1;
  ScalarField out(mesh.nodes(), 0.0);
  for (int a = 0; a < n; ++a) {
    const Mask rest = full & ~(Mask(1) << a);
    ScalarField comp(mesh.nodes());
    for (std::size_t k = 0; k < mesh.nodes(); ++k) comp[k] = b[k][rest];
    const auto d = mesh.grid().derivative(comp, a);
    const int sign = insertion_sign(rest, a);
    for (std::size_t k = 0; k < mesh.nodes(); ++k) out[k] += sign * d[k];
  }
  return out;
}

}  // namespace lagcal
