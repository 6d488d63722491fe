#pragma once
// Pointwise exterior algebra on R^D, D <= 8.
//
// A FormValue stores the coefficients of a homogeneous k-form at a single
// point. Multi-indices are increasing words over {0, ..., D-1}, encoded as
// bitmasks, so antisymmetry is canonical: only masks with popcount == k carry
// coefficients.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace lagcal {

inline constexpr int kMaxAmbientDim = 8;

using Mask = std::uint32_t;

class DegreeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

inline Mask mask_of(std::initializer_list<int> indices) {
  Mask m = 0;
  for (int i : indices) m |= Mask(1) << i;
  return m;
}

inline Mask mask_of(std::span<const int> indices) {
  Mask m = 0;
  for (int i : indices) m |= Mask(1) << i;
  return m;
}

inline std::vector<int> indices_of(Mask m) {
  std::vector<int> out;
  for (int i = 0; m; ++i, m >>= 1)
    if (m & 1u) out.push_back(i);
  return out;
}

/// (-1)^(number of entries of `word` below i): the sign of dx^i ∧ dx^word
/// relative to the increasing word word ∪ {i}.
inline int insertion_sign(Mask word, int i) {
  return (std::popcount(word & ((Mask(1) << i) - 1)) & 1) ? -1 : 1;
}

/// Sign of the shuffle permutation taking (a, b) to increasing order.
inline int shuffle_sign(Mask a, Mask b) {
  int inversions = 0;
  for (Mask rest = b; rest; rest &= rest - 1) {
    const int j = std::countr_zero(rest);
    inversions += std::popcount(a >> (j + 1));
  }
  return (inversions & 1) ? -1 : 1;
}

/// Determinant of a small dense row-major k x k matrix (partial pivoting).
inline double small_determinant(std::vector<double> a, int k) {
  double det = 1.0;
  for (int col = 0; col < k; ++col) {
    int piv = col;
    for (int r = col + 1; r < k; ++r)
      if (std::abs(a[r * k + col]) > std::abs(a[piv * k + col])) piv = r;
    if (a[piv * k + col] == 0.0) return 0.0;
    if (piv != col) {
      for (int c = 0; c < k; ++c) std::swap(a[piv * k + c], a[col * k + c]);
      det = -det;
    }
    const double p = a[col * k + col];
    det *= p;
    for (int r = col + 1; r < k; ++r) {
      const double f = a[r * k + col] / p;
      if (f == 0.0) continue;
      for (int c = col; c < k; ++c) a[r * k + c] -= f * a[col * k + c];
    }
  }
  return det;
}

template <class T>
class FormValue {
 public:
  FormValue() = default;
  FormValue(int dim, int degree) : dim_(dim), degree_(degree), coeffs_(std::size_t(1) << dim, T{}) {
    if (dim < 0 || dim > kMaxAmbientDim) throw DegreeError("ambient dimension out of range");
    if (degree < 0 || degree > dim) throw DegreeError("form degree exceeds ambient dimension");
  }

  static FormValue scalar(int dim, T value) {
    FormValue v(dim, 0);
    v.coeffs_[0] = value;
    return v;
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }

  T& operator[](Mask m) { return coeffs_[m]; }
  const T& operator[](Mask m) const { return coeffs_[m]; }

  T& at(std::initializer_list<int> increasing) { return coeffs_[mask_of(increasing)]; }
  const T& at(std::initializer_list<int> increasing) const { return coeffs_[mask_of(increasing)]; }

  /// Coefficient for an arbitrary (not necessarily increasing) word; repeated
  /// indices give zero.
  T component(std::span<const int> word) const {
    Mask m = 0;
    int sign = 1;
    for (int i : word) {
      if (m & (Mask(1) << i)) return T{};
      // dx^w ∧ dx^i -> count entries of m above i
      if (std::popcount(m >> (i + 1)) & 1) sign = -sign;
      m |= Mask(1) << i;
    }
    return T(sign) * coeffs_[m];
  }

  std::span<const T> raw() const { return coeffs_; }
  std::span<T> raw() { return coeffs_; }

  template <class F>
  void for_each_term(F&& f) const {
    for (Mask m = 0; m < coeffs_.size(); ++m)
      if (std::popcount(m) == degree_ && coeffs_[m] != T{}) f(m, coeffs_[m]);
  }

  FormValue& operator+=(const FormValue& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  FormValue& operator-=(const FormValue& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  FormValue& operator*=(T s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  friend FormValue operator+(FormValue a, const FormValue& b) { return a += b; }
  friend FormValue operator-(FormValue a, const FormValue& b) { return a -= b; }
  friend FormValue operator*(T s, FormValue a) { return a *= s; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, double(std::abs(c)));
    return m;
  }

 private:
  void check_same_shape(const FormValue& o) const {
    if (o.dim_ != dim_ || o.degree_ != degree_) throw DegreeError("form shape mismatch");
  }

  int dim_ = 0;
  int degree_ = 0;
  std::vector<T> coeffs_ = std::vector<T>(1, T{});
};

template <class T>
FormValue<T> wedge(const FormValue<T>& a, const FormValue<T>& b) {
  if (a.dim() != b.dim()) throw DegreeError("wedge: ambient dimension mismatch");
  if (a.degree() + b.degree() > a.dim())
    throw DegreeError("wedge: degree " + std::to_string(a.degree() + b.degree()) +
                      " exceeds ambient dimension " + std::to_string(a.dim()));
  FormValue<T> out(a.dim(), a.degree() + b.degree());
  a.for_each_term([&](Mask ma, const T& ca) {
    b.for_each_term([&](Mask mb, const T& cb) {
      if (ma & mb) return;
      out[ma | mb] += T(shuffle_sign(ma, mb)) * ca * cb;
    });
  });
  return out;
}

/// i_v a, for a vector v with real components.
template <class T>
FormValue<T> interior(std::span<const double> v, const FormValue<T>& a) {
  if (a.degree() == 0) throw DegreeError("interior product of a 0-form");
  if (static_cast<int>(v.size()) != a.dim()) throw DegreeError("interior: vector dimension mismatch");
  FormValue<T> out(a.dim(), a.degree() - 1);
  a.for_each_term([&](Mask m, const T& c) {
    for (Mask rest = m; rest; rest &= rest - 1) {
      const int i = std::countr_zero(rest);
      const Mask w = m & ~(Mask(1) << i);
      out[w] += T(insertion_sign(w, i) * v[i]) * c;
    }
  });
  return out;
}

/// a(v_1, ..., v_k) for k = deg a vectors of length D.
template <class T>
T evaluate(const FormValue<T>& a, std::span<const std::span<const double>> vectors) {
  const int k = a.degree();
  if (static_cast<int>(vectors.size()) != k) throw DegreeError("evaluate: need exactly deg(a) vectors");
  if (k == 0) return a[0];
  T sum{};
  std::vector<double> minor(std::size_t(k) * k);
  a.for_each_term([&](Mask m, const T& c) {
    int row = 0;
    for (Mask rest = m; rest; rest &= rest - 1, ++row) {
      const int i = std::countr_zero(rest);
      for (int col = 0; col < k; ++col) minor[row * k + col] = vectors[col][i];
    }
    sum += c * T(small_determinant(minor, k));
  });
  return sum;
}

template <class T>
FormValue<double> real_part(const FormValue<T>& a) {
  FormValue<double> out(a.dim(), a.degree());
  for (Mask m = 0; m < a.raw().size(); ++m) out[m] = std::real(a[m]);
  return out;
}

template <class T>
FormValue<double> imag_part(const FormValue<T>& a) {
  FormValue<double> out(a.dim(), a.degree());
  for (Mask m = 0; m < a.raw().size(); ++m) out[m] = std::imag(a[m]);
  return out;
}

inline FormValue<std::complex<double>> conjugate(const FormValue<std::complex<double>>& a) {
  FormValue<std::complex<double>> out(a.dim(), a.degree());
  for (Mask m = 0; m < a.raw().size(); ++m) out[m] = std::conj(a[m]);
  return out;
}

inline FormValue<std::complex<double>> complexify(const FormValue<double>& a) {
  FormValue<std::complex<double>> out(a.dim(), a.degree());
  for (Mask m = 0; m < a.raw().size(); ++m) out[m] = a[m];
  return out;
}

/// Dense antisymmetric matrix W_ij = a(e_i, e_j) of a 2-form, row-major.
inline std::vector<double> two_form_matrix(const FormValue<double>& a) {
  if (a.degree() != 2) throw DegreeError("two_form_matrix: need a 2-form");
  const int d = a.dim();
  std::vector<double> w(std::size_t(d) * d, 0.0);
  a.for_each_term([&](Mask m, double c) {
    const int i = std::countr_zero(m);
    const int j = 31 - std::countl_zero(m);
    w[i * d + j] = c;
    w[j * d + i] = -c;
  });
  return w;
}

}  // namespace lagcal
