#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lagcal/lagcal.hpp"

using namespace lagcal;
constexpr double kPi = std::numbers::pi;

namespace {

ModelPtr catalog_ptr(const std::string& name) { return std::make_shared<const AmbientModel>(catalog_model(name)); }

LagMesh t2_circle(int N, double amp = 0.0, std::vector<double> wrap = {1.0, 0.0}, bool vertical = false) {
  return LagMesh::from_map(
      catalog_ptr("t2_cy"), Grid::torus(1, N),
      [amp, vertical](std::span<const double> u, std::span<double> x) {
        x[vertical ? 1 : 0] = u[0];
        x[vertical ? 0 : 1] = amp * std::sin(2 * kPi * u[0]);
      },
      {wrap});
}

LagMesh real_line(ModelPtr model, int N) {
  return LagMesh::from_map(model, Grid::box({-1.0}, {1.0}, N), [](std::span<const double> u, std::span<double> x) {
    x[0] = u[0];
    x[1] = 0.0;
  });
}

template <class F>
double simpson(F f, double a, double b, int M = 20000) {
  const double h = (b - a) / M;
  double s = f(a) + f(b);
  for (int i = 1; i < M; ++i) s += (i % 2 ? 4 : 2) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST(CcExact, GraphOfBumpDerivative) {
  const ModelPtr model = catalog_ptr("r2_exact");
  const double A = 0.05, R = 0.6;
  // H = −A b(x/R) moves the line to the graph of u = A b'(x/R)/R.
  auto u = [&](double x) {
    const double s = x / R;
    if (std::abs(s) >= 1.0) return 0.0;
    const double q = 1.0 - s * s;
    return A / R * bump_value(s, kGaussBumpSharpness) * (-2.0 * kGaussBumpSharpness * s / (q * q));
  };
  const double oracle = 0.5 * simpson([&](double x) { return u(x) * u(x); }, -R, R);
  const std::string text = "-0.05*gbump(x/0.6)";
  const auto path = flow_path(real_line(model, 128), HamiltonianFamily::from_expression(text, *model), 40);
  for (std::size_t k = 0; k < path.back().nodes(); ++k)
    EXPECT_NEAR(path.back().point(k)[1], u(path.back().grid().param(k, 0)), 1e-9);
  const double cc = cc_invariant(path, *model->beta).value;
  const double exact = cc_exact_closed_form(path.front(), path.back(), *model);
  EXPECT_NEAR(cc, oracle, 1e-6 * oracle);
  EXPECT_NEAR(exact, oracle, 1e-6 * oracle);
}

TEST(CcExact, ClosedFormNeedsPrimitives) {
  const auto t2 = catalog_model("t2_cy");
  const LagMesh m = t2_circle(16);
  EXPECT_THROW(cc_exact_closed_form(m, m, t2), ModelError);
}

TEST(CcInvariant, HamiltonianInvariancesOnTorus) {
  const LagMesh m = t2_circle(32);
  const RealForm beta = imag_part(m.model().Omega());
  const auto H = HamiltonianFamily::from_expression("0.05*sin(2*pi*x)*(1+t) + 0.02*cos(2*pi*(x+y))", m.model(),
                                                    SupportKind::Normalized);
  const double base = cc_invariant(flow_path(m, H, 40, 0.0, 1.0, 2), beta).value;
  EXPECT_GT(std::abs(base), 1e-3);

  const auto Hr = reparametrized(H, [](double t) { return t * t; }, [](double t) { return 2 * t; });
  EXPECT_NEAR(cc_invariant(flow_path(m, Hr, 40, 0.0, 1.0, 2), beta).value, base, 1e-6);

  const auto Hs = shifted(H, [](double t) { return std::cos(3 * t); });
  EXPECT_NEAR(cc_invariant(flow_path(m, Hs, 40, 0.0, 1.0, 2), beta).value, base, 1e-6);

  const auto pa = flow_path(m, H, 20, 0.0, 0.5, 2);
  const auto pb = flow_path(pa.back(), H, 20, 0.5, 1.0, 2);
  const double a = cc_invariant(pa, beta).value, b = cc_invariant(pb, beta).value;
  EXPECT_NEAR(cc_invariant(concatenate(pa, pb), beta).value, a + b, 1e-14);
  EXPECT_NEAR(a + b, base, 1e-6);
}

TEST(CcInvariant, CumulativeEndsAtTotal) {
  const LagMesh m = t2_circle(32);
  const RealForm beta = imag_part(m.model().Omega());
  const auto H = HamiltonianFamily::from_expression("0.05*cos(2*pi*(x-y))", m.model(), SupportKind::Normalized);
  const auto path = flow_path(m, H, 20);
  const auto cum = cc_cumulative(path, beta, {0, 10, 20});
  EXPECT_EQ(cum[0], 0.0);
  EXPECT_NEAR(cum[2], cc_invariant(path, beta).value, 1e-15);
}

TEST(CcInvariant, NonzeroBetaOnInitialMeshIsRejected) {
  // The vertical circle has ∫ dy = 1.
  const LagMesh m = t2_circle(16, 0.0, {0.0, 1.0}, true);
  const RealForm beta = imag_part(m.model().Omega());
  const auto path = translation_path(m, {0.1, 0.0}, 4);
  EXPECT_THROW(cc_invariant(path, beta), NormalizationError);
}

TEST(Calabi, SeparableHamiltonianQuadrature) {
  const auto r2 = catalog_model("r2");
  const auto H = HamiltonianFamily::from_expression("(1+x^2+x^3)*(1+y^2)*(1+t)", r2);
  // Simpson in space and time is exact for cubics.
  const double oracle = (8.0 / 3.0) * (8.0 / 3.0) * 1.5;
  EXPECT_NEAR(classical_calabi(r2, H, Grid::box({-1.0, -1.0}, {1.0, 1.0}, 32), 4), oracle, 1e-12);
}

TEST(Calabi, ProductChainAgrees) {
  const ModelPtr r2 = catalog_ptr("r2");
  const auto product = std::make_shared<const AmbientModel>(make_product_model(1));
  const Grid g = Grid::box({-1.0, -1.0}, {1.0, 1.0}, 48);
  const auto H = HamiltonianFamily::from_expression("0.04*gbump(x/0.8)*gbump(y/0.8)*(1+0.5*sin(3*t))", *r2);
  const double cal = classical_calabi(*r2, H, g, 40);
  const auto path = flow_path(diagonal_mesh(product, g), lift_to_second_factor(H, 2), 40);
  const double cc = cc_invariant(path, *product->beta).value;
  const double ban = banyaga_value(path);
  const double exact = cc_exact_closed_form(path.front(), path.back(), *product);
  EXPECT_GT(std::abs(cal), 1e-3);
  EXPECT_NEAR(cc, cal, 1e-4 * std::abs(cal));
  EXPECT_NEAR(ban, cal, 1e-4 * std::abs(cal));
  EXPECT_NEAR(exact, cal, 1e-4 * std::abs(cal));
}

TEST(Banyaga, RejectsNonGraphPaths) {
  const LagMesh m = t2_circle(16);
  EXPECT_THROW(banyaga_value(translation_path(m, {0.0, 0.1}, 2)), PathError);
}

TEST(Flux, TranslationPairsWithLoop) {
  const LagMesh m = t2_circle(32, 0.1);
  for (double a : {0.1, 0.3, -0.7}) EXPECT_NEAR(flux_pairing(translation_path(m, {0.0, a}, 10), {0, 5}), a, 1e-13);
  EXPECT_NEAR(flux_pairing(translation_path(m, {0.4, 0.0}, 10), {0, 5}), 0.0, 1e-13);
}

TEST(Flux, HamiltonianFluxVanishes) {
  const LagMesh m = t2_circle(64, 0.05);
  const auto H = HamiltonianFamily::from_expression("0.05*sin(2*pi*x)*(1+t) + 0.02*cos(2*pi*(x+y))", m.model(),
                                                    SupportKind::Normalized);
  IsotopyPath path = flow_path(m, H, 40, 0.0, 1.0, 2);
  EXPECT_LT(std::abs(flux_pairing(path, {0, 0})), 1e-12);
  // Finite-difference node velocities instead of the exact field.
  path.velocity = nullptr;
  EXPECT_LT(std::abs(flux_pairing(path, {0, 0})), 1e-6);
}

TEST(Liouville, DetectsScalingConstant) {
  const auto m = catalog_model("r2_exact");
  const auto lg = liouville_gamma(m, *m.beta);
  EXPECT_NEAR(lg.c, 0.5, 1e-12);
  for (const auto& p : sample_points(m, 10, 3)) EXPECT_NEAR(lg.gamma(p).raw()[0], p[1], 1e-12);
  const auto installed = install_liouville_gamma(m, 2.0 * *m.beta);
  EXPECT_NEAR(*installed.scaling_constant, 0.5, 1e-12);
}

TEST(Liouville, NonHomogeneousBetaIsRejected) {
  const auto m = catalog_model("r2_exact");
  const RealForm beta = form_from_expressions(2, 1, m.coordinates, {{{1}, "1+x^2"}});
  EXPECT_THROW(liouville_gamma(m, beta), NotHomogeneousError);
}

TEST(Energy, HamiltonianGraphPath) {
  // The flow of ε cos 2πx keeps graphs over x, where re Ω pulls back to du.
  const double eps = 0.05;
  const LagMesh m = t2_circle(64);
  const auto H = HamiltonianFamily::from_expression("0.05*cos(2*pi*x)", m.model(), SupportKind::Normalized);
  EXPECT_NEAR(energy(flow_path(m, H, 20)), eps * eps / 2, 1e-10);
}

TEST(Volume, FlatAndTiltedCircles) {
  EXPECT_NEAR(volume(t2_circle(32)), 1.0, 1e-14);
  const LagMesh tilted = LagMesh::from_map(
      catalog_ptr("t2_cy"), Grid::torus(1, 32),
      [](std::span<const double> u, std::span<double> x) {
        x[0] = u[0];
        x[1] = u[0];
      },
      {{1.0, 1.0}});
  EXPECT_NEAR(volume(tilted), std::sqrt(2.0), 1e-13);
}
