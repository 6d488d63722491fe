// Acceptance run: one PASS/FAIL line per criterion. Scenario results are
// compared against oracles computed here by separate quadrature or closed forms.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "lagcal/scenario.hpp"

using namespace lagcal;
namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

namespace {

const fs::path kScenarios = LAGCAL_SCENARIO_DIR;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  Outcome() { detail.precision(10); }

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

ScenarioReport run_file(const std::string& file, const std::function<void(nlohmann::json&)>& edit = nullptr) {
  auto j = read_json_file(kScenarios / file);
  if (edit) edit(j);
  return run_scenario(parse_config(j, kScenarios));
}

double value(const ScenarioReport& r, const std::string& name) { return r.values.at(name); }

template <class F>
double simpson(F f, double a, double b, int M = 200000) {
  const double h = (b - a) / M;
  double s = f(a) + f(b);
  for (int i = 1; i < M; ++i) s += (i % 2 ? 4 : 2) * f(a + i * h);
  return s * h / 3.0;
}

// exp(a (1 − 1/(1 − s²))) on |s| < 1 and its derivative.
double profile(double s, double a) { return std::abs(s) < 1.0 ? std::exp(a * (1.0 - 1.0 / (1.0 - s * s))) : 0.0; }
double profile_slope(double s, double a) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return profile(s, a) * (-2.0 * a * s / (q * q));
}

Outcome check_exact_case() {
  Outcome o;
  const auto r = run_file("exact_graph_r2.json");
  const double A = value(r, "bump_amplitude"), R = 0.6, a = 8.0;
  const double l2 = simpson([&](double x) { return std::pow(A / R * profile_slope(x / R, a), 2); }, -R, R);
  const double oracle = 0.5 * l2;
  const double cc = value(r, "cc"), exact = value(r, "cc_exact");
  o.detail << "cc=" << cc << " closed_form=" << exact << " oracle=" << oracle << " t=" << r.seconds << "s";
  o.require(std::abs(oracle - 0.02) < 1e-5, "oracle differs from 0.02");
  o.require(std::abs(cc - oracle) < 1e-5, "cc vs oracle");
  o.require(std::abs(exact - oracle) < 1e-5, "closed form vs oracle");
  o.require(r.seconds < 5.0, "runtime >= 5 s");
  return o;
}

Outcome check_homotopy() {
  Outcome o;
  const auto r = run_file("homotopy_t2.json");
  const double cc = value(r, "cc");
  const double dr = std::abs(value(r, "cc_reparametrized") - cc), ds = std::abs(value(r, "cc_shifted") - cc);
  const double dc = std::abs(value(r, "cc_first_half") + value(r, "cc_second_half") - value(r, "cc_concatenated"));
  o.detail << "cc=" << cc << " reparam=" << dr << " shift=" << ds << " concat=" << dc;
  o.require(dr < 1e-6, "reparametrization");
  o.require(ds < 1e-6, "time shift");
  o.require(dc < 1e-6, "concatenation");
  o.require(std::abs(value(r, "cc_concatenated") - cc) < 1e-6, "concatenated path vs single path");
  return o;
}

Outcome check_calabi_chain() {
  Outcome o;
  const auto r = run_file("calabi_product.json");
  // Separable quadrature of ∫∫ H dt dx dy for the scenario Hamiltonian.
  const double a = 8.0;
  const double g08 = simpson([&](double x) { return profile(x / 0.8, a); }, -0.8, 0.8);
  const double g07 = simpson([&](double y) { return profile((y + 0.1) / 0.7, a); }, -0.8, 0.6);
  const double x07 = simpson([&](double x) { return x * profile((x - 0.1) / 0.7, a); }, -0.6, 0.8);
  const double time_mean = 1.0 + 0.5 * (1.0 - std::cos(3.0)) / 3.0;
  const double oracle = 0.05 * g08 * g08 * time_mean + 0.02 * x07 * g07;
  const double cal = value(r, "calabi"), cc = value(r, "cc"), ban = value(r, "banyaga");
  o.detail << "calabi=" << cal << " cc=" << cc << " banyaga=" << ban << " oracle=" << oracle << " t=" << r.seconds << "s";
  o.require(std::abs(cal - cc) < 1e-4 && std::abs(cal - ban) < 1e-4 && std::abs(cc - ban) < 1e-4, "pairwise");
  o.require(std::abs(cal - oracle) < 1e-4, "calabi vs separable oracle");
  o.require(r.seconds < 30.0, "runtime >= 30 s");
  return o;
}

Outcome check_lemma_identity() {
  Outcome o;
  const auto r = run_file("identities_t2.json");
  const double res = value(r, "lemma_residual");
  o.detail << "pairs=" << r.config.source.value("lemma_pairs", 0) << " N=" << r.config.resolution
           << " max_residual=" << res;
  o.require(r.config.source.value("lemma_pairs", 0) >= 5, "fewer than 5 pairs");
  o.require(res < 1e-6, "residual");
  return o;
}

Outcome check_variations() {
  Outcome o;
  const auto r = run_file("variations_t2.json");
  const double oracle = std::pow(2 * kPi, 4) / 2;
  const double vol2 = value(r, "vol_second_variation");
  const double cc2_mis = std::abs(value(r, "cc_second_difference") / value(r, "cc_second_variation") - 1.0);
  const double vol2_mis = std::abs(value(r, "vol_second_difference") / vol2 - 1.0);
  o.detail << "cc_order=" << value(r, "cc_first_order") << " vol_order=" << value(r, "vol_first_order")
           << " cc2_mismatch=" << cc2_mis << " vol2_mismatch=" << vol2_mis << " vol2=" << vol2 << " oracle=" << oracle;
  o.require(value(r, "cc_first_order") >= 1.9, "cc first-variation order");
  o.require(value(r, "vol_first_order") >= 1.9, "vol first-variation order");
  o.require(cc2_mis < 0.05, "cc second variation");
  o.require(vol2_mis < 0.05, "vol second variation");
  o.require(std::abs(vol2 / oracle - 1.0) < 0.01, "vol second variation on flat circle");
  return o;
}

Outcome check_calibration() {
  Outcome o;
  const auto r = run_file("identities_t2.json");
  o.detail << "special_defect=" << value(r, "special_defect") << " flat_gap=" << value(r, "flat_gap")
           << " min_random_gap=" << value(r, "min_random_gap") << " pointwise=" << value(r, "calibration_identity");
  o.require(r.config.source.value("random_graphs", 0) >= 20, "fewer than 20 graphs");
  o.require(value(r, "special_defect") < 1e-12, "special defect");
  o.require(std::abs(value(r, "flat_gap")) < 1e-10, "flat gap");
  o.require(value(r, "min_random_gap") >= 1e-10, "random gap");
  o.require(value(r, "calibration_identity") < 1e-6, "pointwise identity");
  return o;
}

Outcome check_convexity() {
  Outcome o;
  const auto r = run_file("convexity_flat_circle.json");
  const double oracle = std::pow(2 * kPi * 0.05, 2) / 2;
  o.detail << "samples=" << r.series.at(0).rows.size() << " min_d2=" << value(r, "min_second_derivative")
           << " mismatch=" << value(r, "max_relative_mismatch") << " at_zero=" << value(r, "analytic_at_zero")
           << " oracle=" << oracle;
  o.require(r.series.at(0).rows.size() >= 11, "fewer than 11 samples");
  o.require(value(r, "min_second_derivative") > 0.0, "positivity");
  o.require(value(r, "max_relative_mismatch") < 0.05, "analytic vs second differences");
  o.require(std::abs(value(r, "analytic_at_zero") / oracle - 1.0) < 0.01, "value at s = 0");
  return o;
}

Outcome check_flux() {
  Outcome o;
  double worst_translation = 0.0, worst_loop = 0.0;
  for (double a : {0.1, 0.3, 0.7}) {
    const auto r = run_file("flux_translation.json", [a](nlohmann::json& j) { j["translation"] = {0.0, a}; });
    worst_translation = std::max(worst_translation, std::abs(value(r, "flux_axis1") - a));
    worst_loop = std::max(worst_loop, std::abs(value(r, "flux_axis1_shifted_loop") - value(r, "flux_axis1")));
  }
  const auto t4 = run_file("flux_hamiltonian_t4.json");
  double ham = std::max(std::abs(value(t4, "flux_axis1")), std::abs(value(t4, "flux_axis2")));
  worst_loop = std::max(worst_loop, std::abs(value(t4, "flux_axis1_shifted_loop") - value(t4, "flux_axis1")));
  worst_loop = std::max(worst_loop, std::abs(value(t4, "flux_axis2_shifted_loop") - value(t4, "flux_axis2")));
  const auto t2 = run_file("homotopy_t2.json", [](nlohmann::json& j) {
    j["name"] = "flux_hamiltonian_t2";
    j["verb"] = "flux";
    j.erase("support");
  });
  ham = std::max(ham, std::abs(value(t2, "flux_axis1")));
  o.detail << "translation_error=" << worst_translation << " hamiltonian_flux=" << ham << " loop_change=" << worst_loop;
  o.require(worst_translation < 1e-6, "translation flux");
  o.require(ham < 1e-8, "hamiltonian flux");
  o.require(worst_loop < 1e-6, "homologous loop");
  return o;
}

Outcome check_two_param() {
  Outcome o;
  const auto r = run_file("identities_t2.json");
  o.detail << "deviation=" << value(r, "two_param_deviation") << " constant=" << value(r, "two_param_constant");
  o.require(value(r, "two_param_deviation") < 1e-6, "spatial deviation");
  o.require(std::abs(value(r, "two_param_constant")) < 1e-6, "constant");
  return o;
}

Outcome check_energy() {
  Outcome o;
  const auto r = run_file("geodesic_energy.json");
  const double g = std::abs(value(r, "energy_derivative_geodesic"));
  const double c = std::abs(value(r, "energy_derivative_control"));
  o.detail << "geodesic_dE=" << g << " control_dE=" << c;
  o.require(g < 1e-4, "geodesic stationarity");
  o.require(c > 1e-2, "control sensitivity");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact-case equality", check_exact_case},
      {"homotopy invariance", check_homotopy},
      {"calabi chain", check_calabi_chain},
      {"bracket integration identity", check_lemma_identity},
      {"variational formulas", check_variations},
      {"special lagrangian detection and calibration", check_calibration},
      {"geodesic convexity", check_convexity},
      {"flux", check_flux},
      {"two-parameter consistency", check_two_param},
      {"energy stationarity", check_energy},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [name, fn] = criteria[i];
    std::string line;
    bool ok = false;
    try {
      Outcome o = fn();
      ok = o.pass;
      line = o.detail.str();
    } catch (const std::exception& e) {
      line = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::printf("%s %2zu %s: %s\n", ok ? "PASS" : "FAIL", i + 1, name.c_str(), line.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
