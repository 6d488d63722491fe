#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lagcal/lagcal.hpp"

using namespace lagcal;
constexpr double kPi = std::numbers::pi;

namespace {

ModelPtr t2() { return std::make_shared<const AmbientModel>(catalog_model("t2_cy")); }

LagMesh circle(int N, double amp = 0.0) {
  return LagMesh::from_map(
      t2(), Grid::torus(1, N), [amp](std::span<const double> u, std::span<double> x) {
        x[0] = u[0];
        x[1] = amp * std::sin(2 * kPi * u[0]);
      },
      {{1.0, 0.0}});
}

}  // namespace

TEST(Flow, LinearHamiltonianTranslatesExactly) {
  const LagMesh m = circle(32, 0.1);
  // H = −a x gives ξ = (0, a).
  const auto H = HamiltonianFamily::from_expression("-0.3*x", m.model(), SupportKind::Normalized);
  const auto path = flow_path(m, H, 10);
  ASSERT_EQ(path.size(), 11u);
  for (std::size_t k = 0; k < m.nodes(); ++k) {
    EXPECT_NEAR(path.back().point(k)[0], m.point(k)[0], 1e-14);
    EXPECT_NEAR(path.back().point(k)[1], m.point(k)[1] + 0.3, 1e-14);
  }
}

TEST(Flow, RotationFlowMatchesClosedForm) {
  const auto r2 = std::make_shared<const AmbientModel>(catalog_model("r2"));
  const Grid g = Grid::box({-1.0}, {1.0}, 32);
  const LagMesh m = LagMesh::from_map(r2, g, [](std::span<const double> u, std::span<double> x) {
    x[0] = u[0];
    x[1] = 0.0;
  });
  // H = (x² + y²)/2 gives ξ = (y, −x): clockwise rotation by angle t.
  const auto H = HamiltonianFamily::from_expression("(x^2+y^2)/2", *r2);
  const auto path = flow_path(m, H, 40, 0.0, 1.0, 2);
  for (std::size_t k = 0; k < m.nodes(); ++k) {
    const double u = g.param(k, 0);
    EXPECT_NEAR(path.back().point(k)[0], u * std::cos(1.0), 1e-9);
    EXPECT_NEAR(path.back().point(k)[1], -u * std::sin(1.0), 1e-9);
  }
  EXPECT_LT(lagrangian_defect(path.back()), 1e-12);
}

TEST(Flow, HamiltonianFlowStaysLagrangian) {
  const auto c2 = std::make_shared<const AmbientModel>(catalog_model("c2"));
  const Grid g = Grid::box({-1.0, -1.0}, {1.0, 1.0}, 24);
  const LagMesh m = LagMesh::from_map(c2, g, [](std::span<const double> u, std::span<double> x) {
    x[0] = u[0];
    x[1] = 0.0;
    x[2] = u[1];
    x[3] = 0.0;
  });
  const auto H = HamiltonianFamily::from_expression("0.1*sin(x1+y2)*cos(x2) + 0.05*y1*x2", *c2);
  const auto path = flow_path(m, H, 20);
  EXPECT_LT(lagrangian_defect(path.back()), 1e-6);
}

TEST(Flow, DegradedFlowIsReported) {
  // Every curve in a surface is Lagrangian, so degradation needs a 2-dimensional mesh.
  const auto c2 = std::make_shared<const AmbientModel>(catalog_model("c2"));
  const Grid g = Grid::box({-1.0, -1.0}, {1.0, 1.0}, 10);
  const LagMesh m = LagMesh::from_map(c2, g, [](std::span<const double> u, std::span<double> x) {
    x[0] = u[0];
    x[1] = 0.0;
    x[2] = u[1];
    x[3] = 0.0;
  });
  const auto H = HamiltonianFamily::from_expression("3*sin(4*(x1+x2))*cos(3*x2)", *c2);
  try {
    flow_path(m, H, 10);
    FAIL() << "expected FlowDegradedError";
  } catch (const FlowDegradedError& e) {
    EXPECT_GT(e.defect, kFlowDefectLimit);
    EXPECT_GT(e.time, 0.0);
  }
}

TEST(Path, ReparametrizationReachesSameEndpoint) {
  const LagMesh m = circle(32);
  const auto H = HamiltonianFamily::from_expression("0.05*sin(2*pi*x)*(1+t)", m.model(), SupportKind::Normalized);
  const auto a = flow_path(m, H, 40, 0.0, 1.0, 2);
  const auto b = flow_path(m, reparametrized(H, [](double t) { return t * t; }, [](double t) { return 2 * t; }), 40, 0.0, 1.0, 2);
  for (std::size_t i = 0; i < a.back().positions().size(); ++i) EXPECT_NEAR(a.back().positions()[i], b.back().positions()[i], 1e-8);
}

TEST(Path, ConcatenationNeedsMatchingEnds) {
  const LagMesh m = circle(16);
  const auto p = translation_path(m, {0.0, 0.1}, 4);
  const auto q = translation_path(m, {0.0, 0.2}, 4);
  EXPECT_THROW(concatenate(p, q), PathError);
  const auto r = translation_path(p.back(), {0.1, 0.0}, 4);
  const auto pr = concatenate(p, r);
  EXPECT_EQ(pr.segments.size(), 2u);
  EXPECT_EQ(pr.size(), 9u);
}

TEST(Path, VelocityFormIsExactForHamiltonianFlow) {
  const LagMesh m = circle(64, 0.05);
  const auto H = HamiltonianFamily::from_expression("0.05*sin(2*pi*x)*(1+t) + 0.02*cos(2*pi*(x+y))", m.model(),
                                                    SupportKind::Normalized);
  const auto path = flow_path(m, H, 40, 0.0, 1.0, 2);
  for (std::size_t j : {std::size_t(0), std::size_t(17), path.size() - 1}) {
    const auto vf = path_velocity_form(path, j);
    EXPECT_LT(vf.generator_residual, 1e-5);
    // The velocity form equals the pullback of dH.
    const LagMesh& mj = path.meshes[j];
    ScalarField h(mj.nodes());
    for (std::size_t k = 0; k < mj.nodes(); ++k) h[k] = H(path.times[j], mj.point(k));
    const auto dh = grid_gradient(mj, h);
    for (std::size_t i = 0; i < dh.components.size(); ++i) EXPECT_NEAR(vf.alpha.components[i], dh.components[i], 2e-5);
  }
}

TEST(TwoParam, CommutingTranslationsGiveConstant) {
  const auto m = catalog_model("t2_cy");
  const double a = 0.4, b = 0.3;
  const TwoParamFunction H = [a](double, double, std::span<const double> p) { return a * p[1]; };
  const TwoParamFunction K = [b](double, double, std::span<const double> p) { return b * p[0]; };
  const auto r = two_param_residual(m, H, K, {{0.2, 0.3}, {0.7, 0.6}}, sample_points(m, 30, 2, 1.0));
  EXPECT_LT(r.spatial_deviation, 1e-9);
  // {H, K} = ξ_H K = (a, 0)·(b, 0) = ab, so R = −ab everywhere.
  EXPECT_NEAR(r.constant, a * b, 1e-9);
}

TEST(TwoParam, ShearFamilyIsConsistent) {
  const auto m = catalog_model("t2_cy");
  const double b = 0.2;
  const TwoParamFunction H = [b](double, double, std::span<const double> p) { return b * std::sin(2 * kPi * p[1]) / (2 * kPi); };
  const TwoParamFunction K = [b](double, double t, std::span<const double> p) {
    const double x = p[0] - t * b * std::cos(2 * kPi * p[1]);
    return 0.3 * std::cos(2 * kPi * x) * std::sin(2 * kPi * p[1]) + 0.1 * std::sin(2 * kPi * x);
  };
  const auto r = two_param_residual(m, H, K, {{0.2, 0.3}, {0.5, 0.5}, {0.8, 0.1}}, sample_points(m, 40, 5, 1.0));
  EXPECT_LT(r.spatial_deviation, 1e-8);
  EXPECT_LT(r.constant, 1e-8);
  // Swapping the roles breaks the compatibility.
  const auto s = two_param_residual(m, K, H, {{0.2, 0.3}}, sample_points(m, 40, 5, 1.0));
  EXPECT_GT(s.spatial_deviation, 1e-2);
}

TEST(LemmaOb, BracketIntegrationIdentity) {
  const LagMesh m = circle(128, 0.3);
  const RealForm beta = imag_part(m.model().Omega());
  const auto H = ScalarFunction::from_expression("sin(2*pi*x)*cos(2*pi*y)+0.3*cos(4*pi*y)", m.model().coordinates);
  const auto K = ScalarFunction::from_expression("cos(2*pi*(x-y))+0.5*sin(2*pi*x)", m.model().coordinates);
  const auto sides = lemma_ob_sides(m, H, K, beta);
  EXPECT_GT(std::abs(sides.lhs), 1.0);
  EXPECT_LT(sides.residual(), 1e-9);
}
