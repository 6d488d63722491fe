#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "lagcal/lagcal.hpp"

using namespace lagcal;
constexpr double kPi = std::numbers::pi;

namespace {

ModelPtr t2() { return std::make_shared<const AmbientModel>(catalog_model("t2_cy")); }

LagMesh circle(const Grid& g, double amp = 0.0) {
  return LagMesh::from_map(
      t2(), g, [amp](std::span<const double> u, std::span<double> x) {
        x[0] = u[0];
        x[1] = amp * std::sin(2 * kPi * u[0]);
      },
      {{1.0, 0.0}});
}

}  // namespace

TEST(Stencil, FornbergCentralWeights) {
  const std::vector<double> x{-1.0, 0.0, 1.0};
  const auto w = fornberg_weights(0.0, x, 2);
  EXPECT_NEAR(w[1][0], -0.5, 1e-15);
  EXPECT_NEAR(w[1][1], 0.0, 1e-15);
  EXPECT_NEAR(w[1][2], 0.5, 1e-15);
  EXPECT_NEAR(w[2][0], 1.0, 1e-15);
  EXPECT_NEAR(w[2][1], -2.0, 1e-15);
}

TEST(Stencil, SimpsonIntegratesCubicsExactly) {
  for (int m : {2, 3, 5, 8}) {
    const double h = 1.0 / m;
    const auto w = simpson_weights(m, h);
    double s = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double x = i * h;
      s += w[i] * (x * x * x - 2 * x + 1);
    }
    EXPECT_NEAR(s, 0.25 - 1.0 + 1.0, 1e-14) << m;
  }
}

TEST(Grid, TorusSpectralDerivative) {
  const Grid g = Grid::torus(1, 32);
  std::vector<double> f(g.nodes());
  for (std::size_t k = 0; k < g.nodes(); ++k) f[k] = std::sin(2 * kPi * g.param(k, 0)) + 0.3 * std::cos(6 * kPi * g.param(k, 0));
  const auto d = g.derivative(f, 0);
  for (std::size_t k = 0; k < g.nodes(); ++k) {
    const double u = g.param(k, 0);
    EXPECT_NEAR(d[k], 2 * kPi * std::cos(2 * kPi * u) - 0.3 * 6 * kPi * std::sin(6 * kPi * u), 1e-11);
  }
}

TEST(Grid, TorusDerivativeWithJump) {
  const Grid g = Grid::torus(1, 16);
  std::vector<double> f(g.nodes());
  for (std::size_t k = 0; k < g.nodes(); ++k) f[k] = 2.0 * g.param(k, 0);
  const auto d = g.derivative(f, 0, 2.0);
  for (double v : d) EXPECT_NEAR(v, 2.0, 1e-12);
}

TEST(Grid, BoxDerivativeExactOnPolynomials) {
  const Grid g = Grid::box({-1.0}, {1.0}, 16);
  std::vector<double> f(g.nodes());
  for (std::size_t k = 0; k < g.nodes(); ++k) f[k] = std::pow(g.param(k, 0), 7) - g.param(k, 0);
  const auto d = g.derivative(f, 0);
  for (std::size_t k = 0; k < g.nodes(); ++k) EXPECT_NEAR(d[k], 7 * std::pow(g.param(k, 0), 6) - 1.0, 1e-10);
}

TEST(Grid, QuadratureWeights) {
  const Grid t = Grid::torus(2, 8);
  double s = 0.0;
  for (double w : t.weights()) s += w;
  EXPECT_NEAR(s, 1.0, 1e-14);
  const Grid b = Grid::box({0.0, -1.0}, {2.0, 1.0}, 16);
  s = 0.0;
  for (std::size_t k = 0; k < b.nodes(); ++k) s += b.weights()[k] * b.param(k, 0) * b.param(k, 0) * (1 + b.param(k, 1));
  EXPECT_NEAR(s, 8.0 / 3.0 * 2.0, 1e-12);
}

TEST(Grid, InvalidShapesThrow) {
  EXPECT_THROW(Grid::torus(1, 7), GridError);
  EXPECT_THROW(Grid::torus(5, 8), GridError);
  EXPECT_THROW(Grid::box({0.0}, {1.0}, 7), GridError);
}

TEST(LagMesh, FlatCircleBasics) {
  const LagMesh m = circle(Grid::torus(1, 32));
  EXPECT_LT(lagrangian_defect(m), 1e-14);
  EXPECT_NEAR(volume(m), 1.0, 1e-14);
  const ScalarField one(m.nodes(), 1.0);
  EXPECT_NEAR(integrate_weighted(m, std::span<const double>(one), real_part(m.model().Omega())), 1.0, 1e-14);
  EXPECT_NEAR(integrate_weighted(m, std::span<const double>(one), imag_part(m.model().Omega())), 0.0, 1e-14);
}

TEST(LagMesh, WavyLoopLength) {
  const double a = 0.1;
  const LagMesh m = circle(Grid::torus(1, 64), a);
  // Length of y = a sin 2πx by composite Simpson on a fine independent grid.
  const int M = 20000;
  double s = 0.0;
  for (int i = 0; i <= M; ++i) {
    const double x = double(i) / M;
    const double w = (i == 0 || i == M) ? 1 : (i % 2 ? 4 : 2);
    s += w * std::sqrt(1 + std::pow(2 * kPi * a * std::cos(2 * kPi * x), 2));
  }
  EXPECT_NEAR(volume(m), s / (3.0 * M), 1e-12);
}

TEST(LagMesh, DegenerateImmersionThrows) {
  const LagMesh m = LagMesh::from_map(t2(), Grid::torus(1, 16), [](std::span<const double>, std::span<double> x) {
    x[0] = 0.0;
    x[1] = 0.0;
  });
  EXPECT_THROW(tangent_frame(m, 3), DegenerateImmersionError);
  EXPECT_THROW(special_defect(m), DegenerateImmersionError);
}

TEST(LagMesh, NonLagrangianSurfaceHasDefect) {
  const auto c2 = std::make_shared<const AmbientModel>(catalog_model("c2"));
  const Grid g = Grid::box({-1.0, -1.0}, {1.0, 1.0}, 16);
  // The (x1, y1) plane is symplectic, not Lagrangian.
  const LagMesh m = LagMesh::from_map(c2, g, [](std::span<const double> u, std::span<double> x) {
    x[0] = u[0];
    x[1] = u[1];
    x[2] = 0.0;
    x[3] = 0.0;
  });
  EXPECT_NEAR(lagrangian_defect(m), 1.0, 1e-12);
}

TEST(Potential, RecoversExactOneForm) {
  const LagMesh m = circle(Grid::torus(1, 64), 0.2);
  ScalarField h(m.nodes());
  for (std::size_t k = 0; k < m.nodes(); ++k) h[k] = std::cos(2 * kPi * m.grid().param(k, 0)) + 0.4 * std::sin(4 * kPi * m.grid().param(k, 0));
  const auto alpha = grid_gradient(m, h);
  const auto res = recover_potential(m, alpha, Normalization::mean_zero());
  const ScalarField w = default_mean_weight(m);
  double mean = 0.0, tw = 0.0;
  for (std::size_t k = 0; k < m.nodes(); ++k) {
    mean += w[k] * h[k];
    tw += w[k];
  }
  mean /= tw;
  for (std::size_t k = 0; k < m.nodes(); ++k) EXPECT_NEAR(res.h[k], h[k] - mean, 1e-10);
  EXPECT_LT(res.residual, 1e-10);
}

TEST(Potential, ClosedButNotExactIsReported) {
  const LagMesh m = circle(Grid::torus(1, 32));
  const auto alpha = pullback_one_form(m, constant_form(2, 1, {{{0}, 1.0}}));
  try {
    recover_potential(m, alpha, Normalization::mean_zero());
    FAIL() << "expected NotExactError";
  } catch (const NotExactError& e) {
    ASSERT_EQ(e.cycle_integrals.size(), 1u);
    EXPECT_NEAR(e.cycle_integrals[0], 1.0, 1e-12);
  }
}

TEST(Potential, CompactSupportOnBox) {
  const auto r2 = std::make_shared<const AmbientModel>(catalog_model("r2"));
  const Grid g = Grid::box({-1.0}, {1.0}, 64);
  const LagMesh m = LagMesh::from_map(r2, g, [](std::span<const double> u, std::span<double> x) {
    x[0] = u[0];
    x[1] = 0.0;
  });
  ScalarField h(m.nodes());
  for (std::size_t k = 0; k < m.nodes(); ++k) h[k] = bump_value(g.param(k, 0) / 0.7, kGaussBumpSharpness);
  const auto res = recover_potential(m, grid_gradient(m, h), Normalization::compact_support());
  for (std::size_t k = 0; k < m.nodes(); ++k) EXPECT_NEAR(res.h[k], h[k], 1e-6);
}

TEST(MeshIo, RoundTripIsExact) {
  const LagMesh m = circle(Grid::torus(1, 16), 0.123456789);
  std::stringstream ss;
  write_mesh(ss, m);
  const LagMesh r = read_mesh(ss);
  EXPECT_EQ(r.positions(), m.positions());
  EXPECT_EQ(r.wraps(), m.wraps());

  const auto r2 = std::make_shared<const AmbientModel>(catalog_model("r2_exact"));
  const LagMesh b = LagMesh::from_map(r2, Grid::box({-1.0}, {1.0}, 16), [](std::span<const double> u, std::span<double> x) {
    x[0] = u[0];
    x[1] = std::sin(u[0]) / 3.0;
  });
  std::stringstream sb;
  write_mesh(sb, b);
  const LagMesh rb = read_mesh(sb);
  EXPECT_EQ(rb.positions(), b.positions());
  EXPECT_EQ(rb.reference(), b.reference());
  EXPECT_EQ(rb.grid().fd_order(), b.grid().fd_order());
}

TEST(MeshIo, TruncatedFileThrows) {
  std::stringstream ss("lagmesh 1\nmodel t2_cy\ndomain torus 1 8\norientation 1\nwraps 1\n1 0\npositions 8 2\n0 0\n");
  EXPECT_THROW(read_mesh(ss), MeshError);
}
