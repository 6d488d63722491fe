#pragma once
// Declarative verification scenarios. A scenario is a JSON object naming a
// verb, an ambient model and verb-specific inputs; running it yields named
// values, residuals checked against tolerances, and CSV series. The config and
// report layouts are documented in docs/formats.md.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "lagcal/catalog.hpp"
#include "lagcal/functionals.hpp"
#include "lagcal/isotopy.hpp"
#include "lagcal/mesh_io.hpp"
#include "lagcal/slag.hpp"

namespace lagcal {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Verb { Cc, CcExact, CalabiProduct, Flux, Geodesic, Convexity, Variations, Identities };

inline const std::vector<std::pair<Verb, std::string>>& verb_table() {
  static const std::vector<std::pair<Verb, std::string>> table{
      {Verb::Cc, "cc"},           {Verb::CcExact, "cc-exact"},     {Verb::CalabiProduct, "calabi-product"},
      {Verb::Flux, "flux"},       {Verb::Geodesic, "geodesic"},    {Verb::Convexity, "convexity"},
      {Verb::Variations, "variations"}, {Verb::Identities, "identities"}};
  return table;
}

inline const std::string& verb_name(Verb v) {
  for (const auto& [verb, name] : verb_table())
    if (verb == v) return name;
  throw std::logic_error("unnamed verb");
}

inline Verb parse_verb(const std::string& s) {
  for (const auto& [verb, name] : verb_table())
    if (name == s) return verb;
  throw ConfigError("unknown scenario verb '" + s + "'");
}

/// Pass condition: residual <= limit, or residual >= limit when at_least.
struct Tolerance {
  double limit = 0.0;
  bool at_least = false;
};

inline std::map<std::string, Tolerance> default_tolerances(Verb v) {
  switch (v) {
    case Verb::Cc:
      return {{"reparametrization", {1e-6}}, {"time_shift", {1e-6}}, {"concatenation", {1e-6}}, {"expected", {1e-5}}};
    case Verb::CcExact:
      return {{"cc_vs_exact", {1e-5}}, {"cc_vs_expected", {1e-5}}, {"exact_vs_expected", {1e-5}}};
    case Verb::CalabiProduct:
      return {{"cc_vs_calabi", {1e-4}},
              {"banyaga_vs_calabi", {1e-4}},
              {"cc_vs_banyaga", {1e-4}},
              {"exact_vs_calabi", {1e-4}}};
    case Verb::Flux:
      return {{"flux_vs_expected", {1e-6}}, {"hamiltonian_flux", {1e-8}}, {"homologous_loop", {1e-6}}};
    case Verb::Geodesic:
      return {{"stationarity", {1e-4}}, {"control_sensitivity", {1e-2, true}}};
    case Verb::Convexity:
      return {{"min_second_derivative", {1e-12, true}}, {"convexity_mismatch", {0.05}}, {"expected_at_zero", {0.01}}};
    case Verb::Variations:
      return {{"cc_first_order", {1.9, true}},
              {"vol_first_order", {1.9, true}},
              {"cc_second_mismatch", {0.05}},
              {"vol_second_mismatch", {0.05}},
              {"vol_second_expected", {0.01}}};
    case Verb::Identities:
      return {{"special_defect", {1e-12}},      {"flat_gap", {1e-10}},  {"random_gap", {1e-10, true}},
              {"calibration_identity", {1e-6}}, {"lemma", {1e-6}},      {"two_param_deviation", {1e-6}},
              {"two_param_constant", {1e-6}}};
  }
  return {};
}

struct ScenarioConfig {
  std::string name;
  Verb verb = Verb::Cc;
  std::string model;
  int resolution = 64;
  int steps = 100;
  std::uint64_t seed = 1;
  std::string output;  // empty: <output root>/<name>
  std::map<std::string, Tolerance> tolerances;
  nlohmann::json source;           // the config object with overrides applied
  std::filesystem::path base_dir;  // model files resolve relative to this
};

/// Command-line overrides applied on top of a parsed config.
struct Overrides {
  std::optional<int> resolution;
  std::optional<std::uint64_t> seed;
  std::map<std::string, double> tolerances;
};

struct Verdict {
  double residual = 0.0;
  Tolerance tolerance;
  bool pass = false;
};

struct Series {
  std::string file;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ScenarioReport {
  ScenarioConfig config;
  std::map<std::string, double> values;
  std::map<std::string, Verdict> verdicts;
  std::vector<Series> series;
  double seconds = 0.0;

  bool pass() const {
    for (const auto& [name, v] : verdicts)
      if (!v.pass) return false;
    return true;
  }

  void check(const std::string& name, double residual) {
    const auto it = config.tolerances.find(name);
    if (it == config.tolerances.end()) throw std::logic_error("no tolerance named '" + name + "'");
    const Tolerance& t = it->second;
    const bool ok = std::isfinite(residual) && (t.at_least ? residual >= t.limit : residual <= t.limit);
    verdicts[name] = {residual, t, ok};
  }
};

namespace detail {

using nlohmann::json;

inline const std::set<std::string>& common_keys() {
  static const std::set<std::string> keys{"name",   "verb",       "model",  "resolution", "steps",
                                          "seed",   "output",     "domain", "initial",    "tolerances",
                                          "description"};
  return keys;
}

inline std::set<std::string> verb_keys(Verb v) {
  switch (v) {
    case Verb::Cc: return {"hamiltonian", "support", "substeps", "expected"};
    case Verb::CcExact: return {"hamiltonian", "graph_bump", "substeps", "expected"};
    case Verb::CalabiProduct: return {"hamiltonian", "substeps"};
    case Verb::Flux: return {"hamiltonian", "translation", "expected", "substeps"};
    case Verb::Geodesic: return {"generator", "duration", "perturbation", "ds", "control_speed"};
    case Verb::Convexity: return {"generator", "back", "duration", "dt", "ds", "samples", "s_max", "expected_at_zero"};
    case Verb::Variations:
      return {"hamiltonian", "generator", "critical", "critical_generator", "epsilons", "flow_steps", "expected_vol2"};
    case Verb::Identities:
      return {"random_graphs", "graph_amplitude", "graph_modes", "lemma_pairs", "lemma_mesh", "two_param"};
  }
  return {};
}

inline std::vector<std::string> param_vars(int n) {
  std::vector<std::string> v;
  for (int a = 1; a <= n; ++a) v.push_back("u" + std::to_string(a));
  if (n == 1) v.push_back("u");
  return v;
}

inline std::vector<double> param_values(std::span<const double> u) {
  std::vector<double> v(u.begin(), u.end());
  if (u.size() == 1) v.push_back(u[0]);
  return v;
}

inline std::string required_string(const ScenarioConfig& c, const char* key) {
  if (!c.source.contains(key)) throw ConfigError("verb '" + verb_name(c.verb) + "' needs '" + key + "'");
  return c.source.at(key).get<std::string>();
}

inline ModelPtr scenario_model(const ScenarioConfig& c) {
  std::string ref = c.model;
  const bool catalog = [&] {
    for (const auto& n : catalog_names())
      if (n == ref) return true;
    return false;
  }();
  if (!catalog) {
    const std::filesystem::path p(ref);
    if (p.is_relative() && !c.base_dir.empty()) ref = (c.base_dir / p).string();
  }
  return std::make_shared<const AmbientModel>(load_model(ref));
}

/// Parameter dimension of the meshes: half the ambient dimension, or the whole
/// base dimension for the product verb.
inline int param_dim(const ScenarioConfig& c, const AmbientModel& m) {
  if (c.verb == Verb::CalabiProduct) return m.dim;
  const json d = c.source.value("domain", json::object());
  return d.value("dimension", m.dim / 2);
}

inline Grid scenario_grid(const ScenarioConfig& c, const AmbientModel& m) {
  const int n = param_dim(c, m);
  if (m.chart == ChartKind::Torus) return Grid::torus(n, c.resolution);
  const json d = c.source.value("domain", json::object());
  const auto lo = d.value("lo", std::vector<double>(n, -1.0));
  const auto hi = d.value("hi", std::vector<double>(n, 1.0));
  if (static_cast<int>(lo.size()) != n || static_cast<int>(hi.size()) != n)
    throw ConfigError("domain lo/hi must have one entry per parameter");
  return Grid::box(lo, hi, c.resolution, d.value("fd_order", Grid::kDefaultFdOrder),
                   d.value("collar", Grid::kDefaultCollar));
}

/// Initial mesh from the "map" expressions in u1..un (default: real section
/// x_{2a} = u_a, scaled by the period on tori).
inline LagMesh scenario_mesh(const ScenarioConfig& c, ModelPtr model, const Grid& g, const char* key = "initial") {
  const json ini = c.source.value(key, json::object());
  const int n = g.n(), D = model->dim;
  const bool torus = model->chart == ChartKind::Torus;
  auto period = [&](int k) { return torus && k < static_cast<int>(model->periods.size()) ? model->periods[k] : 1.0; };
  std::vector<Expression> map;
  if (ini.contains("map")) {
    const auto texts = ini.at("map").get<std::vector<std::string>>();
    if (static_cast<int>(texts.size()) != D) throw ConfigError(std::string(key) + ".map needs one expression per coordinate");
    for (const auto& t : texts) map.emplace_back(t, param_vars(n));
  } else if (2 * n > D) {
    throw ConfigError(std::string(key) + ".map is required when the parameter dimension exceeds half the ambient one");
  }
  std::vector<std::vector<double>> wraps;
  if (torus) {
    if (ini.contains("wraps")) {
      wraps = ini.at("wraps").get<std::vector<std::vector<double>>>();
      if (static_cast<int>(wraps.size()) != n) throw ConfigError(std::string(key) + ".wraps needs one vector per parameter");
      for (const auto& w : wraps)
        if (static_cast<int>(w.size()) != D) throw ConfigError(std::string(key) + ".wraps vectors need one entry per coordinate");
    } else {
      for (int a = 0; a < n; ++a) {
        std::vector<double> w(D, 0.0);
        w[2 * a] = period(2 * a);
        wraps.push_back(w);
      }
    }
  }
  const int orientation = ini.value("orientation", 1);
  if (orientation != 1 && orientation != -1) throw ConfigError("orientation must be +1 or -1");
  return LagMesh::from_map(
      model, g,
      [&](std::span<const double> u, std::span<double> x) {
        if (map.empty()) {
          std::fill(x.begin(), x.end(), 0.0);
          for (int a = 0; a < n; ++a) x[2 * a] = u[a] * period(2 * a);
          return;
        }
        const auto vals = param_values(u);
        for (int d = 0; d < D; ++d) x[d] = map[d](vals);
      },
      wraps, orientation);
}

inline ScalarField node_values(const LagMesh& mesh, const Expression& e) {
  ScalarField out(mesh.nodes());
  for (std::size_t k = 0; k < mesh.nodes(); ++k) out[k] = e(param_values(mesh.grid().params(k)));
  return out;
}

inline ScalarField ambient_values(const LagMesh& mesh, const ScalarFunction& f, double t = 0.0) {
  ScalarField out(mesh.nodes());
  for (std::size_t k = 0; k < mesh.nodes(); ++k) out[k] = f(t, mesh.point(k));
  return out;
}

/// Cumulative 𝒞 at every even sample index (the first row is t = 0, 𝒞 = 0).
inline Series cc_series(const IsotopyPath& path, const RealForm& beta, const std::string& file) {
  std::vector<std::size_t> ends;
  for (std::size_t j = 2; j < path.size(); j += 2) ends.push_back(j);
  Series s{file, {"t", "cc"}, {{path.times.front(), 0.0}}};
  if (path.segments.size() != 1 || ends.empty()) return s;
  const auto vals = cc_cumulative(path, beta, ends);
  for (std::size_t i = 0; i < ends.size(); ++i) s.rows.push_back({path.times[ends[i]], vals[i]});
  return s;
}

/// ∫ (d/dx profile(x/R))² dx by composite Simpson, profile = exp(a (1 − 1/(1 − s²))).
inline double bump_derivative_l2(double radius, double sharpness) {
  const int M = 200000;
  const double h = 2.0 * radius / M;
  double sum = 0.0;
  for (int i = 0; i <= M; ++i) {
    const double s = (-radius + i * h) / radius;
    const double q = 1.0 - s * s;
    const double d = q > 0.0 ? bump_value(s, sharpness) * (-2.0 * sharpness * s / (q * q)) / radius : 0.0;
    const double w = (i == 0 || i == M) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * d * d;
  }
  return sum * h / 3.0;
}

inline double min_pairwise_order(const std::vector<double>& eps, const std::vector<double>& err) {
  double order = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < eps.size(); ++i)
    order = std::min(order, std::log(std::abs(err[i]) / std::abs(err[i + 1])) / std::log(eps[i] / eps[i + 1]));
  return order;
}

/// Σ_j a_j sin(2π κ_j·p/period + φ_j) with analytic gradient.
inline ScalarFunction random_trig(const AmbientModel& m, std::mt19937_64& rng, int terms, int max_wave) {
  std::uniform_int_distribution<int> wave(-max_wave, max_wave);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2.0 * std::numbers::pi);
  struct Term {
    std::vector<double> k;
    double a, phi;
  };
  std::vector<Term> ts;
  for (int j = 0; j < terms; ++j) {
    Term t{std::vector<double>(m.dim), amp(rng), phase(rng)};
    bool zero = true;
    for (int d = 0; d < m.dim; ++d) {
      const double period = d < static_cast<int>(m.periods.size()) ? m.periods[d] : 1.0;
      const int w = wave(rng);
      zero = zero && w == 0;
      t.k[d] = 2.0 * std::numbers::pi * w / period;
    }
    if (zero) t.k[0] = 2.0 * std::numbers::pi / (m.periods.empty() ? 1.0 : m.periods[0]);
    ts.push_back(t);
  }
  auto arg = [](const Term& t, std::span<const double> p) {
    double s = t.phi;
    for (std::size_t d = 0; d < p.size(); ++d) s += t.k[d] * p[d];
    return s;
  };
  return ScalarFunction(
      [ts, arg](double, std::span<const double> p) {
        double v = 0.0;
        for (const auto& t : ts) v += t.a * std::sin(arg(t, p));
        return v;
      },
      [ts, arg](double, std::span<const double> p, std::span<double> g) {
        std::fill(g.begin(), g.end(), 0.0);
        for (const auto& t : ts) {
          const double c = t.a * std::cos(arg(t, p));
          for (std::size_t d = 0; d < p.size(); ++d) g[d] += c * t.k[d];
        }
      });
}

inline void require_holomorphic(const ScenarioConfig& c, const AmbientModel& m) {
  if (!m.holo_volume || !m.complex_structure)
    throw ConfigError("verb '" + verb_name(c.verb) + "' needs a model with a complex structure and holomorphic volume");
}

inline void require_torus(const ScenarioConfig& c, const AmbientModel& m) {
  if (m.chart != ChartKind::Torus)
    throw ConfigError("verb '" + verb_name(c.verb) + "' needs a torus model (loops or compact meshes)");
}

/// Parses every expression the verb will evaluate so malformed text fails
/// before any computation.
inline void validate_inputs(const ScenarioConfig& c) {
  const ModelPtr model = scenario_model(c);
  const AmbientModel& m = *model;
  const Grid g = scenario_grid(c, m);
  const int n = g.n();
  if (c.verb != Verb::CalabiProduct) scenario_mesh(c, model, g);
  auto ham = [&](const char* key) { ScalarFunction::from_expression(required_string(c, key), m.coordinates); };
  auto gen = [&](const char* key) { Expression(required_string(c, key), param_vars(n)); };
  switch (c.verb) {
    case Verb::Cc:
      ham("hamiltonian");
      if (c.steps % 2) throw ConfigError("cc needs an even step count (the path is also split in halves)");
      if (!m.beta && !m.holo_volume) throw ConfigError("cc needs a model with beta or a holomorphic volume");
      if (c.source.contains("support")) {
        const auto s = c.source.at("support").get<std::string>();
        if (s != "compact" && s != "normalized") throw ConfigError("support must be 'compact' or 'normalized'");
      }
      break;
    case Verb::CcExact:
      if (!m.beta || !m.liouville_primitive || !m.gamma_primitive || !m.scaling_constant)
        throw ConfigError("cc-exact needs a model with beta, a Liouville primitive, gamma and a scaling constant");
      if (c.source.contains("graph_bump")) {
        if (m.dim != 2) throw ConfigError("graph_bump needs a two-dimensional model");
        const auto gb = c.source.at("graph_bump");
        const auto profile = gb.value("profile", std::string("gbump"));
        if (profile != "bump" && profile != "gbump") throw ConfigError("graph_bump.profile must be 'bump' or 'gbump'");
        if (gb.value("radius", 0.6) <= 0.0 || gb.value("l2_squared", 0.04) <= 0.0)
          throw ConfigError("graph_bump radius and l2_squared must be positive");
      } else {
        ham("hamiltonian");
      }
      break;
    case Verb::CalabiProduct:
      if (m.chart != ChartKind::Euclidean || m.dim % 2) throw ConfigError("calabi-product needs a Euclidean base model");
      ham("hamiltonian");
      break;
    case Verb::Flux:
      require_torus(c, m);
      if (c.source.contains("translation")) {
        if (static_cast<int>(c.source.at("translation").get<std::vector<double>>().size()) != m.dim)
          throw ConfigError("translation needs one entry per coordinate");
        if (c.source.contains("expected") &&
            static_cast<int>(c.source.at("expected").get<std::vector<double>>().size()) != g.n())
          throw ConfigError("expected needs one flux per loop axis");
      } else {
        ham("hamiltonian");
      }
      break;
    case Verb::Geodesic:
      require_holomorphic(c, m);
      gen("generator");
      ham("perturbation");
      Expression(c.source.value("control_speed", std::string("2*t")), {"t"});
      break;
    case Verb::Convexity:
      require_holomorphic(c, m);
      gen("generator");
      break;
    case Verb::Variations:
      require_holomorphic(c, m);
      ham("hamiltonian");
      gen("generator");
      if (c.source.contains("critical_generator")) gen("critical_generator");
      scenario_mesh(c, model, g, "critical");
      if (c.source.value("epsilons", std::vector<double>{1e-2, 5e-3, 2.5e-3}).size() < 2)
        throw ConfigError("variations needs at least two epsilons");
      break;
    case Verb::Identities:
      require_holomorphic(c, m);
      if (c.source.contains("lemma_mesh")) scenario_mesh(c, model, g, "lemma_mesh");
      if (c.source.contains("two_param")) {
        const auto tp = c.source.at("two_param");
        std::vector<std::string> vars{"s", "t"};
        vars.insert(vars.end(), m.coordinates.begin(), m.coordinates.end());
        Expression(tp.at("H").get<std::string>(), vars);
        Expression(tp.at("K").get<std::string>(), vars);
      }
      break;
  }
}

}  // namespace detail

/// Parses and validates a scenario config; errors surface before any computation.
inline ScenarioConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {},
                                   const Overrides& ov = {}) {
  if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
  ScenarioConfig c;
  try {
    c.verb = parse_verb(j.at("verb").get<std::string>());
    const auto allowed = detail::verb_keys(c.verb);
    for (const auto& [key, value] : j.items())
      if (!detail::common_keys().count(key) && !allowed.count(key))
        throw ConfigError("unknown key '" + key + "' for verb '" + verb_name(c.verb) + "'");
    c.name = j.value("name", verb_name(c.verb));
    c.model = j.at("model").get<std::string>();
    c.resolution = ov.resolution.value_or(j.value("resolution", 64));
    c.steps = j.value("steps", 100);
    c.seed = ov.seed.value_or(j.value("seed", std::uint64_t(1)));
    c.output = j.value("output", std::string());
    c.base_dir = base_dir;
    c.tolerances = default_tolerances(c.verb);
    auto set_tol = [&](const std::string& key, double v) {
      auto it = c.tolerances.find(key);
      if (it == c.tolerances.end()) throw ConfigError("unknown tolerance '" + key + "' for verb '" + verb_name(c.verb) + "'");
      if (!(v > 0.0)) throw ConfigError("tolerance '" + key + "' must be positive");
      it->second.limit = v;
    };
    if (j.contains("tolerances"))
      for (const auto& [key, value] : j.at("tolerances").items()) set_tol(key, value.get<double>());
    for (const auto& [key, value] : ov.tolerances) set_tol(key, value);
    if (c.resolution < 4) throw ConfigError("resolution must be at least 4");
    if (c.steps < 2) throw ConfigError("steps must be at least 2");
    c.source = j;
    c.source["resolution"] = c.resolution;
    c.source["seed"] = c.seed;
    for (const auto& [key, t] : c.tolerances) c.source["tolerances"][key] = t.limit;
    detail::validate_inputs(c);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed scenario config: ") + e.what());
  } catch (const ModelError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  } catch (const GridError& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  } catch (const MeshError& e) {
    throw ConfigError(std::string("initial mesh: ") + e.what());
  }
  return c;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline ScenarioConfig load_config(const std::filesystem::path& path, const Overrides& ov = {}) {
  return parse_config(read_json_file(path), path.parent_path(), ov);
}

namespace detail {

inline void run_cc(ScenarioReport& r) {
  const ScenarioConfig& c = r.config;
  const ModelPtr model = scenario_model(c);
  const Grid g = scenario_grid(c, *model);
  const LagMesh mesh0 = scenario_mesh(c, model, g);
  const bool torus = model->chart == ChartKind::Torus;
  const std::string support = c.source.value("support", std::string(torus ? "normalized" : "compact"));
  const auto H = HamiltonianFamily::from_expression(required_string(c, "hamiltonian"), *model,
                                                    support == "compact" ? SupportKind::Compact : SupportKind::Normalized);
  const int sub = c.source.value("substeps", 4);
  const RealForm beta = model->designated_beta();
  const auto path = flow_path(mesh0, H, c.steps, 0.0, 1.0, sub);
  const auto base = cc_invariant(path, beta);
  const auto Hr = reparametrized(H, [](double t) { return t * t; }, [](double t) { return 2.0 * t; });
  const double reparam = cc_invariant(flow_path(mesh0, Hr, c.steps, 0.0, 1.0, sub), beta).value;
  const auto Hs = shifted(H, [](double t) { return std::sin(t); });
  const double shift = cc_invariant(flow_path(mesh0, Hs, c.steps, 0.0, 1.0, sub), beta).value;
  const auto pa = flow_path(mesh0, H, c.steps / 2, 0.0, 0.5, sub);
  const auto pb = flow_path(pa.back(), H, c.steps / 2, 0.5, 1.0, sub);
  const double first = cc_invariant(pa, beta).value, second = cc_invariant(pb, beta).value;
  const double joined = cc_invariant(concatenate(pa, pb), beta).value;
  r.values = {{"cc", base.value},
              {"cc_reparametrized", reparam},
              {"cc_shifted", shift},
              {"cc_concatenated", joined},
              {"cc_first_half", first},
              {"cc_second_half", second},
              {"max_potential_residual", base.max_potential_residual},
              {"max_generator_residual", base.max_generator_residual}};
  r.check("reparametrization", std::abs(reparam - base.value));
  r.check("time_shift", std::abs(shift - base.value));
  r.check("concatenation", std::abs(joined - (first + second)));
  if (c.source.contains("expected")) {
    const double e = c.source.at("expected").get<double>();
    r.values["expected"] = e;
    r.check("expected", std::abs(base.value - e));
  }
  r.series.push_back(cc_series(path, beta, "cc_series.csv"));
}

inline void run_cc_exact(ScenarioReport& r) {
  const ScenarioConfig& c = r.config;
  const ModelPtr model = scenario_model(c);
  const Grid g = scenario_grid(c, *model);
  const LagMesh mesh0 = scenario_mesh(c, model, g);
  std::string text;
  std::optional<double> expected;
  if (c.source.contains("expected")) expected = c.source.at("expected").get<double>();
  if (c.source.contains("graph_bump")) {
    const auto gb = c.source.at("graph_bump");
    const std::string profile = gb.value("profile", std::string("gbump"));
    const double R = gb.value("radius", 0.6), L = gb.value("l2_squared", 0.04);
    const double A = std::sqrt(L / bump_derivative_l2(R, profile == "gbump" ? kGaussBumpSharpness : 1.0));
    text = "-" + format_double(A) + "*" + profile + "(" + model->coordinates[0] + "/" + format_double(R) + ")";
    r.values["bump_amplitude"] = A;
    r.values["u_l2_squared"] = L;
    if (!expected) expected = 0.5 * L;
  } else {
    text = required_string(c, "hamiltonian");
  }
  const auto H = HamiltonianFamily::from_expression(text, *model);
  const auto path = flow_path(mesh0, H, c.steps, 0.0, 1.0, c.source.value("substeps", 1));
  const auto cc = cc_invariant(path, *model->beta);
  const double exact = cc_exact_closed_form(path.front(), path.back(), *model);
  r.values["cc"] = cc.value;
  r.values["cc_exact"] = exact;
  r.values["max_potential_residual"] = cc.max_potential_residual;
  r.check("cc_vs_exact", std::abs(cc.value - exact));
  if (expected) {
    r.values["expected"] = *expected;
    r.check("cc_vs_expected", std::abs(cc.value - *expected));
    r.check("exact_vs_expected", std::abs(exact - *expected));
  }
  r.series.push_back(cc_series(path, *model->beta, "cc_series.csv"));
}

inline void run_calabi_product(ScenarioReport& r) {
  const ScenarioConfig& c = r.config;
  const ModelPtr base = scenario_model(c);
  const Grid g = scenario_grid(c, *base);
  const auto product = std::make_shared<const AmbientModel>(make_product_model(base->dim / 2));
  const auto H = HamiltonianFamily::from_expression(required_string(c, "hamiltonian"), *base);
  const double cal = classical_calabi(*base, H, g, c.steps);
  const auto path = flow_path(diagonal_mesh(product, g), lift_to_second_factor(H, base->dim), c.steps, 0.0, 1.0,
                              c.source.value("substeps", 1));
  const auto cc = cc_invariant(path, *product->beta);
  const double ban = banyaga_value(path);
  const double exact = cc_exact_closed_form(path.front(), path.back(), *product);
  r.values = {{"calabi", cal},
              {"cc", cc.value},
              {"banyaga", ban},
              {"cc_exact", exact},
              {"max_potential_residual", cc.max_potential_residual}};
  r.check("cc_vs_calabi", std::abs(cc.value - cal));
  r.check("banyaga_vs_calabi", std::abs(ban - cal));
  r.check("cc_vs_banyaga", std::abs(cc.value - ban));
  r.check("exact_vs_calabi", std::abs(exact - cal));
  r.series.push_back(cc_series(path, *product->beta, "cc_series.csv"));
}

inline void run_flux(ScenarioReport& r) {
  const ScenarioConfig& c = r.config;
  const ModelPtr model = scenario_model(c);
  const Grid g = scenario_grid(c, *model);
  const LagMesh mesh0 = scenario_mesh(c, model, g);
  const bool translation = c.source.contains("translation");
  IsotopyPath path;
  std::vector<double> expected(g.n(), 0.0);
  if (translation) {
    const auto w = c.source.at("translation").get<std::vector<double>>();
    path = translation_path(mesh0, w, c.steps);
    const Eigen::MatrixXd W = omega_matrix(*model, mesh0.point(0));
    const Eigen::Map<const Eigen::VectorXd> wv(w.data(), model->dim);
    for (int a = 0; a < g.n(); ++a) {
      const Eigen::Map<const Eigen::VectorXd> wrap(mesh0.wraps()[a].data(), model->dim);
      expected[a] = wrap.dot(W * wv);
    }
    if (c.source.contains("expected")) {
      expected = c.source.at("expected").get<std::vector<double>>();
    }
  } else {
    const auto H = HamiltonianFamily::from_expression(required_string(c, "hamiltonian"), *model, SupportKind::Normalized);
    path = flow_path(mesh0, H, c.steps, 0.0, 1.0, c.source.value("substeps", 4));
  }
  double vs_expected = 0.0, ham = 0.0, homologous = 0.0;
  for (int a = 0; a < g.n(); ++a) {
    std::vector<int> idx(g.n(), g.count(0) / 2);
    idx[a] = 0;
    std::size_t other = 0;
    for (int b = 0; b < g.n(); ++b) other += idx[b] * g.stride(b);
    if (g.n() == 1) other = g.count(0) / 2;
    const double f0 = flux_pairing(path, {a, 0});
    const double f1 = flux_pairing(path, {a, other});
    const std::string k = "flux_axis" + std::to_string(a + 1);
    r.values[k] = f0;
    r.values[k + "_shifted_loop"] = f1;
    if (translation) r.values["expected_axis" + std::to_string(a + 1)] = expected[a];
    vs_expected = std::max(vs_expected, std::abs(f0 - expected[a]));
    ham = std::max({ham, std::abs(f0), std::abs(f1)});
    homologous = std::max(homologous, std::abs(f0 - f1));
  }
  if (translation)
    r.check("flux_vs_expected", vs_expected);
  else
    r.check("hamiltonian_flux", ham);
  r.check("homologous_loop", homologous);
}

inline Series theta_series(const std::vector<std::pair<std::string, const LagMesh*>>& meshes) {
  Series s{"theta.csv", {"node"}, {}};
  const LagMesh& first = *meshes.front().second;
  for (int a = 0; a < first.n(); ++a) s.columns.push_back("u" + std::to_string(a + 1));
  std::vector<ScalarField> th;
  for (const auto& [name, m] : meshes) {
    s.columns.push_back(name);
    th.push_back(phase_field(*m).theta);
  }
  for (std::size_t k = 0; k < first.nodes(); ++k) {
    std::vector<double> row{double(k)};
    for (int a = 0; a < first.n(); ++a) row.push_back(first.grid().param(k, a));
    for (const auto& t : th) row.push_back(t[k]);
    s.rows.push_back(row);
  }
  return s;
}

inline void run_geodesic(ScenarioReport& r) {
  const ScenarioConfig& c = r.config;
  const ModelPtr model = scenario_model(c);
  const Grid g = scenario_grid(c, *model);
  const LagMesh mesh0 = scenario_mesh(c, model, g);
  const ScalarField h = node_values(mesh0, Expression(required_string(c, "generator"), param_vars(g.n())));
  const double T = c.source.value("duration", 1.0);
  const Expression speed_expr(c.source.value("control_speed", std::string("2*t")), {"t"});
  const auto speed = [speed_expr](double t) { return speed_expr(std::span<const double>(&t, 1)); };
  const auto P = ScalarFunction::from_expression(required_string(c, "perturbation"), model->coordinates);
  const double ds = c.source.value("ds", 1e-3);
  const auto geo = geodesic_shoot(mesh0, h, T, c.steps);
  const auto ctrl = geodesic_shoot(mesh0, h, T, c.steps, kDefaultCosFloor, speed);
  const auto s1 = energy_stationarity_residual(geo.path, P, ds);
  const auto s2 = energy_stationarity_residual(ctrl.path, P, ds);
  r.values = {{"energy_geodesic", energy(geo.path)},
              {"energy_control", energy(ctrl.path)},
              {"energy_derivative_geodesic", s1.derivative},
              {"energy_derivative_control", s2.derivative}};
  r.check("stationarity", std::abs(s1.derivative));
  r.check("control_sensitivity", std::abs(s2.derivative));
  r.series.push_back(theta_series({{"theta_start", &geo.path.front()},
                                   {"theta_mid", &geo.path.meshes[geo.path.size() / 2]},
                                   {"theta_end", &geo.path.back()}}));
}

inline void run_convexity(ScenarioReport& r) {
  const ScenarioConfig& c = r.config;
  const ModelPtr model = scenario_model(c);
  const Grid g = scenario_grid(c, *model);
  const LagMesh mesh0 = scenario_mesh(c, model, g);
  const ScalarField k = node_values(mesh0, Expression(required_string(c, "generator"), param_vars(g.n())));
  const double back = c.source.value("back", 0.1), duration = c.source.value("duration", 1.2);
  const double dt = c.source.value("dt", 0.0025), ds = c.source.value("ds", 0.01), s_max = c.source.value("s_max", 1.0);
  const int samples = c.source.value("samples", 11);
  auto count = [dt](double x, const char* what) {
    const double q = x / dt;
    const long n = std::lround(q);
    if (std::abs(q - n) > 1e-9 || n < 0) throw ConfigError(std::string(what) + " must be a multiple of dt");
    return static_cast<std::size_t>(n);
  };
  const std::size_t nb = count(back, "back"), nf = count(duration, "duration"), di = count(ds, "ds");
  if (samples < 2) throw ConfigError("convexity needs at least two samples");
  std::vector<std::size_t> centre;
  for (int q = 0; q < samples; ++q) {
    const std::size_t j = nb + count(s_max * q / (samples - 1), "sample spacing");
    if (j < di + 2 || j + di > nf || (j - di) % 2 || di % 2)
      throw ConfigError("convexity samples need even prefix lengths inside the shot interval");
    centre.push_back(j);
  }
  ScalarField neg(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) neg[i] = -k[i];
  const LagMesh start = nb ? geodesic_shoot(mesh0, neg, back, static_cast<int>(nb)).path.back() : mesh0;
  const auto geo = geodesic_shoot(start, k, duration, static_cast<int>(nf));
  std::vector<std::size_t> ends;
  for (std::size_t j : centre) ends.insert(ends.end(), {j - di, j, j + di});
  const RealForm beta = model->designated_beta();
  const auto cum = cc_cumulative(geo.path, beta, ends);
  Series s{"convexity.csv", {"s", "cc", "second_difference", "analytic"}, {}};
  double min_d2 = std::numeric_limits<double>::infinity(), mismatch = 0.0, at_zero = 0.0;
  for (int q = 0; q < samples; ++q) {
    const double fd = (cum[3 * q] - 2.0 * cum[3 * q + 1] + cum[3 * q + 2]) / (ds * ds);
    const double an = geodesic_cc_convexity(geo, centre[q]);
    const double sv = geo.path.times[centre[q]] - back;
    if (q == 0) at_zero = an;
    min_d2 = std::min({min_d2, fd, an});
    mismatch = std::max(mismatch, std::abs(fd / an - 1.0));
    s.rows.push_back({sv, cum[3 * q + 1], fd, an});
  }
  r.values = {{"analytic_at_zero", at_zero}, {"min_second_derivative", min_d2}, {"max_relative_mismatch", mismatch}};
  r.check("min_second_derivative", min_d2);
  r.check("convexity_mismatch", mismatch);
  if (c.source.contains("expected_at_zero")) {
    const double e = c.source.at("expected_at_zero").get<double>();
    r.values["expected_at_zero"] = e;
    r.check("expected_at_zero", std::abs(at_zero / e - 1.0));
  }
  r.series.push_back(std::move(s));
}

inline void run_variations(ScenarioReport& r) {
  const ScenarioConfig& c = r.config;
  const ModelPtr model = scenario_model(c);
  const Grid g = scenario_grid(c, *model);
  const LagMesh mesh = scenario_mesh(c, model, g);
  const LagMesh crit = scenario_mesh(c, model, g, "critical");
  const auto K = HamiltonianFamily::from_expression(required_string(c, "hamiltonian"), *model);
  const Expression hexpr(required_string(c, "generator"), param_vars(g.n()));
  const auto eps = c.source.value("epsilons", std::vector<double>{1e-2, 5e-3, 2.5e-3});
  const int fs = c.source.value("flow_steps", 16);
  const RealForm beta = model->designated_beta();
  auto cc_at = [&](const LagMesh& m, double e) { return cc_invariant(flow_path(m, K, fs, 0.0, e, 2), beta).value; };
  const ScalarField k = ambient_values(mesh, K.H), h = node_values(mesh, hexpr);
  const double cc1 = cc_first_variation(mesh, k), vol1 = vol_first_variation(mesh, h);
  Series s{"variations.csv", {"epsilon", "cc_difference", "cc_error", "vol_difference", "vol_error"}, {}};
  std::vector<double> cc_err, vol_err;
  for (double e : eps) {
    const double cfd = (cc_at(mesh, e) - cc_at(mesh, -e)) / (2.0 * e);
    const double vfd = (volume(linear_lift(mesh, h, e)) - volume(linear_lift(mesh, h, -e))) / (2.0 * e);
    cc_err.push_back(cfd - cc1);
    vol_err.push_back(vfd - vol1);
    s.rows.push_back({e, cfd, cfd - cc1, vfd, vfd - vol1});
  }
  const double e = eps.back();
  const Expression hcexpr(c.source.value("critical_generator", hexpr.text()), param_vars(g.n()));
  const ScalarField kc = ambient_values(crit, K.H), hc = node_values(crit, hcexpr);
  const double cc2 = cc_second_variation_critical(crit, kc);
  const double cc2_fd = (cc_at(crit, e) + cc_at(crit, -e)) / (e * e);
  const double vol2 = vol_second_variation(crit, hc);
  const double vol2_fd =
      (volume(linear_lift(crit, hc, e)) - 2.0 * volume(crit) + volume(linear_lift(crit, hc, -e))) / (e * e);
  const double cc_order = min_pairwise_order(eps, cc_err), vol_order = min_pairwise_order(eps, vol_err);
  r.values = {{"cc_first_variation", cc1},  {"vol_first_variation", vol1}, {"cc_first_order", cc_order},
              {"vol_first_order", vol_order}, {"cc_second_variation", cc2}, {"cc_second_difference", cc2_fd},
              {"vol_second_variation", vol2}, {"vol_second_difference", vol2_fd}};
  r.check("cc_first_order", cc_order);
  r.check("vol_first_order", vol_order);
  r.check("cc_second_mismatch", std::abs(cc2_fd / cc2 - 1.0));
  r.check("vol_second_mismatch", std::abs(vol2_fd / vol2 - 1.0));
  if (c.source.contains("expected_vol2")) {
    const double ev = c.source.at("expected_vol2").get<double>();
    r.values["expected_vol2"] = ev;
    r.check("vol_second_expected", std::abs(vol2 / ev - 1.0));
  }
  r.series.push_back(std::move(s));
}

/// Random Lagrangian graph y = ∇F(x) over the real section, F a trigonometric sum.
inline LagMesh random_graph(ModelPtr model, const Grid& g, std::mt19937_64& rng, double amplitude, int modes) {
  const int n = g.n();
  std::uniform_int_distribution<int> wave(-modes, modes);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  struct Term {
    std::vector<int> k;
    double a, b;
  };
  std::vector<Term> terms;
  for (int j = 0; j < modes; ++j) {
    Term t{std::vector<int>(n), coef(rng), coef(rng)};
    bool zero = true;
    for (int a = 0; a < n; ++a) {
      t.k[a] = wave(rng);
      zero = zero && t.k[a] == 0;
    }
    if (zero) t.k[0] = 1;
    terms.push_back(t);
  }
  std::vector<std::vector<double>> wraps;
  for (int a = 0; a < n; ++a) {
    std::vector<double> w(model->dim, 0.0);
    w[2 * a] = model->periods.empty() ? 1.0 : model->periods[2 * a];
    wraps.push_back(w);
  }
  return LagMesh::from_map(
      model, g,
      [&](std::span<const double> u, std::span<double> x) {
        std::fill(x.begin(), x.end(), 0.0);
        for (int a = 0; a < n; ++a) x[2 * a] = u[a] * wraps[a][2 * a];
        for (const auto& t : terms) {
          double arg = 0.0;
          for (int a = 0; a < n; ++a) arg += 2.0 * std::numbers::pi * t.k[a] * u[a];
          const double d = amplitude * (-t.a * std::sin(arg) + t.b * std::cos(arg));
          for (int a = 0; a < n; ++a) x[2 * a + 1] += d * t.k[a];
        }
      },
      wraps);
}

inline void run_identities(ScenarioReport& r) {
  const ScenarioConfig& c = r.config;
  const ModelPtr model = scenario_model(c);
  const Grid g = scenario_grid(c, *model);
  const LagMesh mesh = scenario_mesh(c, model, g);
  const RealForm reO = real_part(model->Omega());
  auto gap = [&](const LagMesh& m) {
    const ScalarField one(m.nodes(), 1.0);
    return volume(m) - integrate_weighted(m, std::span<const double>(one), reO);
  };
  std::mt19937_64 rng(c.seed);
  const double flat_gap = gap(mesh);
  double calib = calibration_identity_residual(mesh);
  double min_gap = std::numeric_limits<double>::infinity();
  const int graphs = c.source.value("random_graphs", 20);
  for (int i = 0; i < graphs; ++i) {
    const LagMesh m = random_graph(model, g, rng, c.source.value("graph_amplitude", 0.05), c.source.value("graph_modes", 3));
    min_gap = std::min(min_gap, gap(m));
    calib = std::max(calib, calibration_identity_residual(m));
  }
  r.values = {{"special_defect", special_defect(mesh)}, {"flat_gap", flat_gap}, {"calibration_identity", calib}};
  r.check("special_defect", r.values["special_defect"]);
  r.check("flat_gap", std::abs(flat_gap));
  r.check("calibration_identity", calib);
  if (graphs > 0) {
    r.values["min_random_gap"] = min_gap;
    r.check("random_gap", min_gap);
  }
  const int pairs = c.source.value("lemma_pairs", 5);
  if (pairs > 0) {
    const LagMesh lm = c.source.contains("lemma_mesh") ? scenario_mesh(c, model, g, "lemma_mesh") : mesh;
    const RealForm beta = model->designated_beta();
    double worst = 0.0;
    for (int i = 0; i < pairs; ++i) {
      const auto H = random_trig(*model, rng, 3, 2);
      const auto K = random_trig(*model, rng, 3, 2);
      worst = std::max(worst, lemma_ob_residual(lm, H, K, beta));
    }
    r.values["lemma_residual"] = worst;
    r.check("lemma", worst);
  }
  if (c.source.contains("two_param")) {
    const auto tp = c.source.at("two_param");
    std::vector<std::string> vars{"s", "t"};
    vars.insert(vars.end(), model->coordinates.begin(), model->coordinates.end());
    const Expression He(tp.at("H").get<std::string>(), vars), Ke(tp.at("K").get<std::string>(), vars);
    auto wrap = [](const Expression& e) {
      return TwoParamFunction([e](double s, double t, std::span<const double> p) {
        std::vector<double> v{s, t};
        v.insert(v.end(), p.begin(), p.end());
        return e(v);
      });
    };
    const auto st = tp.value("samples", std::vector<std::pair<double, double>>{{0.2, 0.3}, {0.5, 0.5}, {0.8, 0.1}});
    const auto pts = sample_points(*model, tp.value("points", std::size_t(50)), c.seed, 1.0);
    const auto res = two_param_residual(*model, wrap(He), wrap(Ke), st, pts);
    r.values["two_param_deviation"] = res.spatial_deviation;
    r.values["two_param_constant"] = res.constant;
    r.check("two_param_deviation", res.spatial_deviation);
    if (tp.value("normalized", true)) r.check("two_param_constant", res.constant);
  }
}

}  // namespace detail

/// Runs one scenario in memory; nothing is written.
inline ScenarioReport run_scenario(const ScenarioConfig& config) {
  ScenarioReport r;
  r.config = config;
  const auto t0 = std::chrono::steady_clock::now();
  switch (config.verb) {
    case Verb::Cc: detail::run_cc(r); break;
    case Verb::CcExact: detail::run_cc_exact(r); break;
    case Verb::CalabiProduct: detail::run_calabi_product(r); break;
    case Verb::Flux: detail::run_flux(r); break;
    case Verb::Geodesic: detail::run_geodesic(r); break;
    case Verb::Convexity: detail::run_convexity(r); break;
    case Verb::Variations: detail::run_variations(r); break;
    case Verb::Identities: detail::run_identities(r); break;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Deterministic report body (timing excluded).
inline nlohmann::json report_json(const ScenarioReport& r) {
  nlohmann::json j;
  j["name"] = r.config.name;
  j["verb"] = verb_name(r.config.verb);
  j["scenario"] = r.config.source;
  j["values"] = nlohmann::json::object();
  for (const auto& [k, v] : r.values) j["values"][k] = v;
  j["residuals"] = nlohmann::json::object();
  j["tolerances"] = nlohmann::json::object();
  j["verdicts"] = nlohmann::json::object();
  for (const auto& [k, v] : r.verdicts) {
    j["residuals"][k] = v.residual;
    j["tolerances"][k] = {{"limit", v.tolerance.limit}, {"comparison", v.tolerance.at_least ? ">=" : "<="}};
    j["verdicts"][k] = v.pass ? "pass" : "fail";
  }
  j["pass"] = r.pass();
  return j;
}

inline void write_series_csv(const std::filesystem::path& path, const Series& s) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < s.columns.size(); ++i) os << (i ? "," : "") << s.columns[i];
  os << "\n";
  for (const auto& row : s.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << "\n";
  }
}

/// report.json, timing.json and one CSV per series under dir.
inline void write_report(const ScenarioReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "report.json");
    if (!os) throw std::runtime_error("cannot write " + (dir / "report.json").string());
    os << report_json(r).dump(2) << "\n";
  }
  {
    std::ofstream os(dir / "timing.json");
    os << nlohmann::json{{"seconds", r.seconds}}.dump(2) << "\n";
  }
  for (const auto& s : r.series) write_series_csv(dir / s.file, s);
}

inline std::filesystem::path output_dir(const ScenarioConfig& c, const std::filesystem::path& root) {
  const std::filesystem::path rel = c.output.empty() ? std::filesystem::path(c.name) : std::filesystem::path(c.output);
  return (rel.is_absolute() ? rel : root / rel).lexically_normal();
}

struct SuiteResult {
  std::string name;
  std::string verb;
  std::filesystem::path output;
  bool pass = false;
  std::string error;
  double seconds = 0.0;
};

/// Manifest: {"scenarios": [path | inline config, ...]}; paths are relative to
/// the manifest. Tolerance overrides apply only to scenarios that know the key.
inline std::vector<ScenarioConfig> load_manifest(const std::filesystem::path& path, const Overrides& ov = {}) {
  const auto j = read_json_file(path);
  if (!j.is_object() || !j.contains("scenarios") || !j.at("scenarios").is_array())
    throw ConfigError(path.string() + ": manifest needs a 'scenarios' array");
  std::vector<ScenarioConfig> out;
  for (const auto& item : j.at("scenarios")) {
    nlohmann::json cfg;
    std::filesystem::path base = path.parent_path();
    if (item.is_string()) {
      const std::filesystem::path p = base / item.get<std::string>();
      cfg = read_json_file(p);
      base = p.parent_path();
    } else {
      cfg = item;
    }
    Overrides local = ov;
    local.tolerances.clear();
    if (cfg.is_object() && cfg.contains("verb") && cfg.at("verb").is_string()) {
      const auto known = default_tolerances(parse_verb(cfg.at("verb").get<std::string>()));
      for (const auto& [k, v] : ov.tolerances)
        if (known.count(k)) local.tolerances[k] = v;
    }
    out.push_back(parse_config(cfg, base, local));
  }
  return out;
}

/// Runs scenarios on at most `parallel` worker threads. Failures are captured
/// per scenario; results keep manifest order.
inline std::vector<SuiteResult> run_suite(const std::vector<ScenarioConfig>& configs, const std::filesystem::path& root,
                                          int parallel = 1) {
  std::vector<std::filesystem::path> dirs;
  std::set<std::filesystem::path> seen;
  for (const auto& c : configs) {
    const auto d = output_dir(c, root);
    if (!seen.insert(d).second) throw ConfigError("duplicate output directory " + d.string());
    dirs.push_back(d);
  }
  std::vector<SuiteResult> results(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      SuiteResult& res = results[i];
      res.name = configs[i].name;
      res.verb = verb_name(configs[i].verb);
      res.output = dirs[i];
      try {
        const auto rep = run_scenario(configs[i]);
        write_report(rep, dirs[i]);
        res.pass = rep.pass();
        res.seconds = rep.seconds;
      } catch (const std::exception& e) {
        res.pass = false;
        res.error = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(parallel, static_cast<int>(configs.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

inline bool suite_passes(const std::vector<SuiteResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

inline nlohmann::json suite_json(const std::vector<SuiteResult>& results) {
  nlohmann::json j;
  j["pass"] = suite_passes(results);
  j["scenarios"] = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json e{{"name", r.name}, {"verb", r.verb}, {"output", r.output.string()}, {"pass", r.pass}};
    if (!r.error.empty()) e["error"] = r.error;
    j["scenarios"].push_back(e);
  }
  return j;
}

}  // namespace lagcal
