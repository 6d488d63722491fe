#pragma once
// Named flat models and a JSON model-file loader.
//
//   r2          (R^2, dx∧dy), J, Ω = dz
//   r2_exact    r2 plus λ = ½(x dy − y dx), β = dy, γ = y, c = ½
//   r4_product  M × M for M = R^2 with ω = −p1*ω_M + p2*ω_M, β, λ, γ, c = 1
//   t2_cy       flat torus R^2/Z^2, Ω = dz
//   t2n_cy      flat T^4 with Ω = dz1 ∧ dz2
//   c2          flat C^2 with Ω = dz1 ∧ dz2 and λ

#include <complex>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "lagcal/ambient_model.hpp"

namespace lagcal {

namespace detail {

inline Eigen::MatrixXd standard_complex_structure(int n, const std::vector<int>& factor_sign = {}) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    const double s = factor_sign.empty() ? 1.0 : factor_sign[k];
    J(2 * k + 1, 2 * k) = s;   // J e_x = s e_y
    J(2 * k, 2 * k + 1) = -s;  // J e_y = -s e_x
  }
  return J;
}

/// Σ s_k dx_k ∧ dy_k in coordinates (x_1, y_1, ..., x_n, y_n).
inline RealForm standard_symplectic(int n, const std::vector<int>& factor_sign = {}) {
  std::vector<std::pair<std::vector<int>, double>> terms;
  for (int k = 0; k < n; ++k) terms.push_back({{2 * k, 2 * k + 1}, factor_sign.empty() ? 1.0 : factor_sign[k]});
  return constant_form(2 * n, 2, terms);
}

/// dz_1 ∧ ... ∧ dz_n.
inline ComplexForm standard_holo_volume(int n) {
  using C = std::complex<double>;
  ComplexForm out = ComplexForm::constant(FormValue<C>::scalar(2 * n, C(1)));
  for (int k = 0; k < n; ++k) {
    FormValue<C> dz(2 * n, 1);
    dz[Mask(1) << (2 * k)] = C(1, 0);
    dz[Mask(1) << (2 * k + 1)] = C(0, 1);
    out = wedge(out, ComplexForm::constant(dz));
  }
  return out;
}

/// ½ Σ_k s_k (x_k dy_k − y_k dx_k), restricted to the coordinate pairs listed.
inline RealForm radial_primitive(int dim, const std::vector<int>& pairs, const std::vector<double>& signs) {
  std::vector<std::string> names;
  for (int i = 0; i < dim; ++i) names.push_back("c" + std::to_string(i));
  std::map<std::vector<int>, std::string> coeffs;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const int ix = 2 * pairs[k], iy = ix + 1;
    const std::string s = signs[k] > 0 ? "0.5*" : "-0.5*";
    const std::string ms = signs[k] > 0 ? "-0.5*" : "0.5*";
    coeffs[{iy}] = s + names[ix];
    coeffs[{ix}] = ms + names[iy];
  }
  return form_from_expressions(dim, 1, names, coeffs);
}

inline std::vector<std::string> paired_names(int n) {
  if (n == 1) return {"x", "y"};
  std::vector<std::string> out;
  for (int k = 1; k <= n; ++k) {
    out.push_back("x" + std::to_string(k));
    out.push_back("y" + std::to_string(k));
  }
  return out;
}

}  // namespace detail

inline AmbientModel make_flat_model(const std::string& name, int n, bool torus, bool with_liouville) {
  AmbientModel m;
  m.name = name;
  m.dim = 2 * n;
  m.chart = torus ? ChartKind::Torus : ChartKind::Euclidean;
  if (torus) m.periods.assign(2 * n, 1.0);
  m.coordinates = detail::paired_names(n);
  m.omega = detail::standard_symplectic(n);
  m.complex_structure = detail::standard_complex_structure(n);
  m.holo_volume = detail::standard_holo_volume(n);
  if (with_liouville) {
    std::vector<int> pairs(n);
    for (int k = 0; k < n; ++k) pairs[k] = k;
    m.liouville_primitive = detail::radial_primitive(2 * n, pairs, std::vector<double>(n, 1.0));
  }
  return m;
}

inline AmbientModel make_r2_exact() {
  AmbientModel m = make_flat_model("r2_exact", 1, false, true);
  m.beta = constant_form(2, 1, {{{1}, 1.0}});
  m.gamma_primitive = form_from_expressions(2, 0, m.coordinates, {{{}, "y"}});
  m.scaling_constant = 0.5;
  return m;
}

/// β = (1/(m+1)) Σ_{i=0}^{m} p1*ω_M^i ∧ p2*ω_M^{m−i} on the 4m-dimensional
/// product, coordinates (first factor pairs, then second factor pairs).
inline RealForm product_beta(int m) {
  if (m < 1 || 4 * m > kMaxAmbientDim) throw ModelError("product model needs 1 <= m <= 2");
  std::vector<int> first(2 * m, 0), second(2 * m, 0);
  for (int k = 0; k < m; ++k) first[k] = 1;
  for (int k = m; k < 2 * m; ++k) second[k] = 1;
  const RealForm w1 = detail::standard_symplectic(2 * m, first);
  const RealForm w2 = detail::standard_symplectic(2 * m, second);
  RealForm sum = RealForm::zero(4 * m, 2 * m);
  for (int i = 0; i <= m; ++i) sum = sum + wedge(wedge_power(w1, i), wedge_power(w2, m - i));
  return (1.0 / (m + 1)) * sum;
}

/// M × M with M = R^{2m}, ω = −p1*ω_M + p2*ω_M, λ = −p1*λ_M + p2*λ_M,
/// Liouville field ½(radial), c = m and γ = (1/m) i_ξ β.
inline AmbientModel make_product_model(int m) {
  if (m < 1 || 4 * m > kMaxAmbientDim) throw ModelError("product model needs 1 <= m <= 2");
  AmbientModel model;
  model.name = m == 1 ? "r4_product" : "r" + std::to_string(4 * m) + "_product";
  model.dim = 4 * m;
  if (m == 1) {
    model.coordinates = {"x1", "y1", "x2", "y2"};
  } else {
    for (int f = 1; f <= 2; ++f)
      for (int k = 1; k <= m; ++k) {
        model.coordinates.push_back("x" + std::to_string(f) + "_" + std::to_string(k));
        model.coordinates.push_back("y" + std::to_string(f) + "_" + std::to_string(k));
      }
  }
  std::vector<int> signs(2 * m, 1);
  for (int k = 0; k < m; ++k) signs[k] = -1;
  model.omega = detail::standard_symplectic(2 * m, signs);
  model.complex_structure = detail::standard_complex_structure(2 * m, signs);
  std::vector<int> pairs(2 * m);
  std::vector<double> lsign(2 * m);
  for (int k = 0; k < 2 * m; ++k) {
    pairs[k] = k;
    lsign[k] = signs[k];
  }
  model.liouville_primitive = detail::radial_primitive(4 * m, pairs, lsign);
  model.beta = product_beta(m);
  const int dim = 4 * m;
  const RealForm beta = *model.beta;
  model.gamma_primitive =
      (1.0 / m) * contract(
                      [dim](std::span<const double> p) {
                        std::vector<double> v(dim);
                        for (int i = 0; i < dim; ++i) v[i] = 0.5 * p[i];
                        return v;
                      },
                      beta);
  model.scaling_constant = double(m);
  return model;
}

inline std::vector<std::string> catalog_names() { return {"r2", "r2_exact", "r4_product", "t2_cy", "t2n_cy", "c2"}; }

inline AmbientModel catalog_model(const std::string& name) {
  if (name == "r2") return make_flat_model("r2", 1, false, false);
  if (name == "r2_exact") return make_r2_exact();
  if (name == "r4_product") return make_product_model(1);
  if (name == "t2_cy") return make_flat_model("t2_cy", 1, true, false);
  if (name == "t2n_cy") return make_flat_model("t2n_cy", 2, true, false);
  if (name == "c2") return make_flat_model("c2", 2, false, true);
  throw ModelError("unknown model '" + name + "'");
}

namespace detail {

inline std::map<std::vector<int>, std::string> read_terms(const nlohmann::json& arr, const char* key) {
  std::map<std::vector<int>, std::string> out;
  for (const auto& t : arr) {
    const auto idx = t.at("indices").get<std::vector<int>>();
    const auto& c = t.at(key);
    const std::string text = c.is_string() ? c.get<std::string>() : nlohmann::json(c.get<double>()).dump();
    if (out.count(idx)) out[idx] = "(" + out[idx] + ")+(" + text + ")";
    else out[idx] = text;
  }
  return out;
}

inline RealForm read_real_form(const nlohmann::json& j, int dim, int degree, const std::vector<std::string>& names) {
  return form_from_expressions(dim, degree, names, read_terms(j, "coefficient"));
}

}  // namespace detail

/// Model description in JSON; see docs/formats.md.
inline AmbientModel model_from_json(const nlohmann::json& j) {
  AmbientModel m;
  try {
    m.name = j.value("name", std::string("custom"));
    m.coordinates = j.at("coordinates").get<std::vector<std::string>>();
    m.dim = static_cast<int>(m.coordinates.size());
    if (m.dim < 2 || m.dim % 2 || m.dim > kMaxAmbientDim) throw ModelError("model dimension must be even and at most 8");
    const std::string chart = j.value("chart", std::string("euclidean"));
    if (chart == "torus") {
      m.chart = ChartKind::Torus;
      m.periods = j.at("periods").get<std::vector<double>>();
      if (static_cast<int>(m.periods.size()) != m.dim) throw ModelError("periods must have one entry per coordinate");
    } else if (chart != "euclidean") {
      throw ModelError("chart must be 'euclidean' or 'torus'");
    }
    const int n = m.dim / 2;
    m.omega = detail::read_real_form(j.at("omega"), m.dim, 2, m.coordinates);
    if (j.contains("complex_structure")) {
      const auto rows = j.at("complex_structure").get<std::vector<std::vector<double>>>();
      if (static_cast<int>(rows.size()) != m.dim) throw ModelError("complex_structure must be D x D");
      Eigen::MatrixXd J(m.dim, m.dim);
      for (int r = 0; r < m.dim; ++r) {
        if (static_cast<int>(rows[r].size()) != m.dim) throw ModelError("complex_structure must be D x D");
        for (int c = 0; c < m.dim; ++c) J(r, c) = rows[r][c];
      }
      m.complex_structure = J;
    }
    if (j.contains("holo_volume")) {
      const auto& hv = j.at("holo_volume");
      std::map<std::vector<int>, std::string> re, im;
      for (const auto& t : hv) {
        const auto idx = t.at("indices").get<std::vector<int>>();
        re[idx] = t.contains("re") ? (t["re"].is_string() ? t["re"].get<std::string>() : t["re"].dump()) : "0";
        im[idx] = t.contains("im") ? (t["im"].is_string() ? t["im"].get<std::string>() : t["im"].dump()) : "0";
      }
      const RealForm fre = form_from_expressions(m.dim, n, m.coordinates, re);
      const RealForm fim = form_from_expressions(m.dim, n, m.coordinates, im);
      m.holo_volume = complexify(fre) + std::complex<double>(0, 1) * complexify(fim);
    }
    if (j.contains("liouville")) m.liouville_primitive = detail::read_real_form(j.at("liouville"), m.dim, 1, m.coordinates);
    if (j.contains("beta")) m.beta = detail::read_real_form(j.at("beta"), m.dim, n, m.coordinates);
    if (j.contains("gamma")) m.gamma_primitive = detail::read_real_form(j.at("gamma"), m.dim, n - 1, m.coordinates);
    if (j.contains("scaling_constant")) m.scaling_constant = j.at("scaling_constant").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed model description: ") + e.what());
  }
  return m;
}

inline AmbientModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("model file " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

/// Catalog name or path to a model file.
inline AmbientModel load_model(const std::string& name_or_path) {
  for (const auto& n : catalog_names())
    if (n == name_or_path) return catalog_model(n);
  if (std::filesystem::exists(name_or_path)) return load_model_file(name_or_path);
  throw ModelError("unknown model '" + name_or_path + "' (not a catalog name or readable file)");
}

}  // namespace lagcal
