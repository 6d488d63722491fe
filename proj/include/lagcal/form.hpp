#pragma once
// Differential forms on flat coordinate charts.

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lagcal/exterior.hpp"
#include "lagcal/expression.hpp"

namespace lagcal {

/// Default centered-difference step for exterior derivatives without an
/// analytic derivative.
inline constexpr double kDefaultFdStep = 1e-4;

struct TangentVectorAtPoint {
  std::vector<double> base;
  std::vector<double> components;
};

template <class T>
class Form {
 public:
  using Value = FormValue<T>;
  using Evaluator = std::function<Value(std::span<const double>)>;
  using Coefficient = std::function<T(std::span<const double>)>;

  struct Term {
    std::vector<int> indices;
    Coefficient coefficient;
  };

  Form(int dim, int degree, Evaluator eval, std::shared_ptr<const Form> d = nullptr)
      : dim_(dim), degree_(degree), eval_(std::move(eval)), d_(std::move(d)) {
    if (degree < 0 || degree > dim) throw DegreeError("form degree exceeds ambient dimension");
    if (d_ && (d_->degree() != degree + 1 || d_->dim() != dim)) throw DegreeError("analytic derivative has wrong shape");
  }

  static Form zero(int dim, int degree) {
    std::shared_ptr<const Form> d;
    if (degree < dim) d = std::make_shared<const Form>(zero(dim, degree + 1));
    return Form(dim, degree, [dim, degree](std::span<const double>) { return Value(dim, degree); }, d);
  }

  /// Constant coefficients; the analytic derivative is zero.
  static Form constant(Value v) {
    const int dim = v.dim(), degree = v.degree();
    std::shared_ptr<const Form> d;
    if (degree < dim) d = std::make_shared<const Form>(zero(dim, degree + 1));
    return Form(dim, degree, [v = std::move(v)](std::span<const double>) { return v; }, d);
  }

  /// Sum of coefficient functions times dx^I. Indices need not be increasing;
  /// the permutation sign is applied.
  static Form from_terms(int dim, int degree, std::vector<Term> terms, std::shared_ptr<const Form> d = nullptr) {
    struct Prepared {
      Mask mask;
      int sign;
      Coefficient f;
    };
    std::vector<Prepared> prepared;
    for (auto& t : terms) {
      if (static_cast<int>(t.indices.size()) != degree) throw DegreeError("term length does not match degree");
      Value probe(dim, degree);
      probe[mask_of(std::span<const int>(t.indices))] = T(1);
      const T s = probe.component(t.indices);
      if (s == T{}) continue;  // repeated index
      prepared.push_back({mask_of(std::span<const int>(t.indices)), std::real(s) > 0 ? 1 : -1, std::move(t.coefficient)});
    }
    return Form(
        dim, degree,
        [dim, degree, prepared = std::move(prepared)](std::span<const double> p) {
          Value v(dim, degree);
          for (const auto& t : prepared) v[t.mask] += T(t.sign) * t.f(p);
          return v;
        },
        std::move(d));
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }

  Value operator()(std::span<const double> p) const { return eval_(p); }

  bool has_analytic_d() const { return static_cast<bool>(d_); }
  const Form& analytic_d() const { return *d_; }
  std::shared_ptr<const Form> analytic_d_ptr() const { return d_; }

  Form with_analytic_d(Form d) const { return Form(dim_, degree_, eval_, std::make_shared<const Form>(std::move(d))); }
  Form without_analytic_d() const { return Form(dim_, degree_, eval_); }

 private:
  int dim_;
  int degree_;
  Evaluator eval_;
  std::shared_ptr<const Form> d_;
};

using RealForm = Form<double>;
using ComplexForm = Form<std::complex<double>>;

template <class T>
Form<T> operator+(const Form<T>& a, const Form<T>& b) {
  if (a.dim() != b.dim() || a.degree() != b.degree()) throw DegreeError("form sum: shape mismatch");
  std::shared_ptr<const Form<T>> d;
  if (a.has_analytic_d() && b.has_analytic_d()) d = std::make_shared<const Form<T>>(a.analytic_d() + b.analytic_d());
  return Form<T>(a.dim(), a.degree(), [a, b](std::span<const double> p) { return a(p) + b(p); }, d);
}

template <class T>
Form<T> operator*(T s, const Form<T>& a) {
  std::shared_ptr<const Form<T>> d;
  if (a.has_analytic_d()) d = std::make_shared<const Form<T>>(s * a.analytic_d());
  return Form<T>(a.dim(), a.degree(), [s, a](std::span<const double> p) { return s * a(p); }, d);
}

template <class T>
Form<T> operator-(const Form<T>& a, const Form<T>& b) {
  return a + T(-1) * b;
}

/// Pointwise wedge product; the analytic derivative follows the graded
/// Leibniz rule when both factors carry one.
template <class T>
Form<T> wedge(const Form<T>& a, const Form<T>& b) {
  if (a.dim() != b.dim()) throw DegreeError("wedge: ambient dimension mismatch");
  const int deg = a.degree() + b.degree();
  if (deg > a.dim())
    throw DegreeError("wedge: degree " + std::to_string(deg) + " exceeds ambient dimension " + std::to_string(a.dim()));
  std::shared_ptr<const Form<T>> d;
  if (deg < a.dim() && a.has_analytic_d() && b.has_analytic_d()) {
    const T sign = (a.degree() % 2) ? T(-1) : T(1);
    d = std::make_shared<const Form<T>>(wedge(a.analytic_d(), b) + sign * wedge(a, b.analytic_d()));
  }
  return Form<T>(a.dim(), deg, [a, b](std::span<const double> p) { return wedge(a(p), b(p)); }, d);
}

/// a ∧ a ∧ ... (k factors); k = 0 gives the constant 1.
template <class T>
Form<T> wedge_power(const Form<T>& a, int k) {
  Form<T> out = Form<T>::constant(FormValue<T>::scalar(a.dim(), T(1)));
  for (int i = 0; i < k; ++i) out = wedge(out, a);
  return out;
}

/// Exterior derivative: the analytic one when present, otherwise centered
/// differences with the given step (O(step^2)).
template <class T>
Form<T> exterior_derivative(const Form<T>& a, double step = kDefaultFdStep) {
  if (a.degree() >= a.dim()) throw DegreeError("exterior derivative of a top-degree form");
  if (a.has_analytic_d()) return a.analytic_d();
  const int dim = a.dim(), degree = a.degree();
  return Form<T>(dim, degree + 1, [a, dim, degree, step](std::span<const double> p) {
    FormValue<T> out(dim, degree + 1);
    std::vector<double> q(p.begin(), p.end());
    for (int i = 0; i < dim; ++i) {
      q[i] = p[i] + step;
      const auto plus = a(q);
      q[i] = p[i] - step;
      const auto minus = a(q);
      q[i] = p[i];
      const T inv = T(1.0 / (2.0 * step));
      for (Mask m = 0; m < plus.raw().size(); ++m) {
        if (std::popcount(m) != degree || (m & (Mask(1) << i))) continue;
        const T diff = (plus[m] - minus[m]) * inv;
        if (diff == T{}) continue;
        out[m | (Mask(1) << i)] += T(insertion_sign(m, i)) * diff;
      }
    }
    return out;
  });
}

template <class T>
FormValue<T> interior_product(const TangentVectorAtPoint& v, const Form<T>& a) {
  if (a.degree() == 0) throw DegreeError("interior product of a 0-form");
  return interior(std::span<const double>(v.components), a(v.base));
}

/// Pointwise contraction with a vector field: p -> i_{V(p)} a(p).
template <class T>
Form<T> contract(std::function<std::vector<double>(std::span<const double>)> field, const Form<T>& a) {
  if (a.degree() == 0) throw DegreeError("interior product of a 0-form");
  return Form<T>(a.dim(), a.degree() - 1, [field = std::move(field), a](std::span<const double> p) {
    const auto v = field(p);
    return interior(std::span<const double>(v), a(p));
  });
}

inline RealForm real_part(const ComplexForm& a) {
  std::shared_ptr<const RealForm> d;
  if (a.has_analytic_d()) d = std::make_shared<const RealForm>(real_part(a.analytic_d()));
  return RealForm(a.dim(), a.degree(), [a](std::span<const double> p) { return real_part(a(p)); }, d);
}

inline RealForm imag_part(const ComplexForm& a) {
  std::shared_ptr<const RealForm> d;
  if (a.has_analytic_d()) d = std::make_shared<const RealForm>(imag_part(a.analytic_d()));
  return RealForm(a.dim(), a.degree(), [a](std::span<const double> p) { return imag_part(a(p)); }, d);
}

inline ComplexForm conjugate(const ComplexForm& a) {
  std::shared_ptr<const ComplexForm> d;
  if (a.has_analytic_d()) d = std::make_shared<const ComplexForm>(conjugate(a.analytic_d()));
  return ComplexForm(a.dim(), a.degree(), [a](std::span<const double> p) { return conjugate(a(p)); }, d);
}

inline ComplexForm complexify(const RealForm& a) {
  std::shared_ptr<const ComplexForm> d;
  if (a.has_analytic_d()) d = std::make_shared<const ComplexForm>(complexify(a.analytic_d()));
  return ComplexForm(a.dim(), a.degree(), [a](std::span<const double> p) { return complexify(a(p)); }, d);
}

/// Real form whose coefficients are expression strings in the ambient
/// coordinates. Keys are index lists (any order). The analytic derivative is
/// assembled from the exact expression gradients.
inline RealForm form_from_expressions(int dim, int degree, const std::vector<std::string>& coordinates,
                                      const std::map<std::vector<int>, std::string>& coefficients) {
  if (static_cast<int>(coordinates.size()) != dim) throw DegreeError("coordinate names do not match dimension");
  std::vector<std::pair<std::vector<int>, Expression>> exprs;
  for (const auto& [idx, text] : coefficients) exprs.emplace_back(idx, Expression(text, coordinates));

  std::vector<RealForm::Term> terms;
  std::vector<RealForm::Term> dterms;
  for (const auto& [idx, e] : exprs) {
    terms.push_back({idx, [e](std::span<const double> p) { return e(p); }});
    if (degree < dim) {
      for (int i = 0; i < dim; ++i) {
        std::vector<int> word{i};
        word.insert(word.end(), idx.begin(), idx.end());
        dterms.push_back({word, [e, i, dim](std::span<const double> p) {
                            std::vector<double> g(dim);
                            e.value_and_gradient(p, g);
                            return g[i];
                          }});
      }
    }
  }
  std::shared_ptr<const RealForm> d;
  if (degree < dim) d = std::make_shared<const RealForm>(RealForm::from_terms(dim, degree + 1, std::move(dterms)));
  return RealForm::from_terms(dim, degree, std::move(terms), d);
}

/// Constant-coefficient real form from a single term list, e.g. {{0,1}, 1.0}.
inline RealForm constant_form(int dim, int degree, const std::vector<std::pair<std::vector<int>, double>>& terms) {
  FormValue<double> v(dim, degree);
  for (const auto& [idx, c] : terms) {
    FormValue<double> unit(dim, degree);
    unit[mask_of(std::span<const int>(idx))] = 1.0;
    v[mask_of(std::span<const int>(idx))] += c * unit.component(idx);
  }
  return RealForm::constant(v);
}

}  // namespace lagcal
