#include <gtest/gtest.h>

#include <cmath>

#include "nld.hpp"

using namespace nld;

namespace {

SISParameters constants(double beta, double gamma, double m, double k, int n = 32,
                        Kernel kernel = Kernel::uniform(1.0)) {
  SISParameters p;
  p.grid = build_grid(Bounds::interval(0.0, 1.0), n);
  p.kernel = kernel;
  p.beta = ScalarField::constant(p.grid, beta);
  p.gamma = ScalarField::constant(p.grid, gamma);
  p.m_sat = ScalarField::constant(p.grid, m);
  p.k = k;
  return p;
}

}  // namespace

TEST(R0Sis, ConstantClosedForms) {
  for (auto [b, g, m, k] : {std::array<double, 4>{2, 1, 1, 1}, {3, 1, 0.5, 1}, {1, 2, 0.2, 5}}) {
    const auto rep = r0_sis(constants(b, g, m, k), 1e-12);
    const double exact = k * b / (g * (m + k));
    EXPECT_NEAR(rep.mu0_next_generation, exact, 1e-10);
    EXPECT_NEAR(rep.mu0_bisection, exact, 1e-10);
    ASSERT_TRUE(rep.mu0_rayleigh);
    EXPECT_NEAR(*rep.mu0_rayleigh, exact, 1e-10);
  }
}

TEST(R0Sis, BumpRoutesAgree) {
  SISParameters p = constants(1, 1, 1, 1, 64, Kernel::tent(0.3));
  p.beta = ScalarField::gaussian_bump(p.grid, 0.5, 2.0, {0.5, 0.0}, 0.15);
  p.d_i = 0.1;
  const auto rep = r0_sis(p);
  EXPECT_LE(rep.agreement, 1e-6);
  EXPECT_FALSE(rep.flagged);
  EXPECT_GT(rep.value(), 1.0);
}

TEST(R0Sis, DisIrrelevant) {
  SISParameters p = constants(2, 1, 1, 1);
  p.beta = ScalarField::affine(p.grid, 1.0, {1.0, 0.0});
  SISParameters q = p;
  q.d_s = 50.0;
  EXPECT_EQ(r0_value(p), r0_value(q));
}

TEST(R0Sis, InvalidParameters) {
  SISParameters p = constants(2, 1, 1, 1);
  p.gamma = ScalarField::constant(p.grid, 0.0);
  EXPECT_THROW(r0_sis(p), InvalidArgument);
  p = constants(2, 1, 1, 1);
  p.k = -1.0;
  EXPECT_THROW(r0_sis(p), InvalidArgument);
}

TEST(LimitDI, ConstantsAreFlat) {
  const auto rep = limit_dI(constants(2, 1, 1, 1), log_grid(1e-3, 1.0));
  EXPECT_NEAR(rep.target_small, 1.0, 1e-15);
  EXPECT_NEAR(rep.target_large, 1.0, 1e-14);
  for (const auto& pt : rep.points) EXPECT_NEAR(pt.r0, 1.0, 1e-10);
  EXPECT_TRUE(rep.monotone);
}

TEST(LimitDI, AffineBetaTargets) {
  SISParameters p = constants(1, 1, 1, 1, 64);
  p.beta = ScalarField::affine(p.grid, 1.0, {1.0, 0.0});
  const auto rep = limit_dI(p, {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3});
  double sup = 0.0, num = 0.0;
  for (int j = 0; j < 64; ++j) {
    const double x = (j + 0.5) / 64.0;
    sup = std::max(sup, (1.0 + x) / 2.0);
    num += (1.0 + x) / 2.0 / 64.0;
  }
  EXPECT_NEAR(rep.target_small, sup, 1e-14);
  EXPECT_NEAR(rep.target_large, num, 1e-14);
  EXPECT_NEAR(rep.target_large, 0.75, 1e-12);
  EXPECT_TRUE(rep.monotone);
  EXPECT_LE(std::abs(rep.points.front().r0 / rep.target_small - 1.0), 0.02);
  EXPECT_LE(std::abs(rep.points.back().r0 / rep.target_large - 1.0), 0.02);
  for (std::size_t i = 1; i < rep.points.size(); ++i) EXPECT_LT(rep.points[i].r0, rep.points[i - 1].r0);
}

TEST(LimitDI, GammaZeroDiverges) {
  SISParameters p = constants(1, 1, 1, 1, 32);
  std::vector<double> g(32, 1.0);
  g[10] = 0.0;
  p.gamma = ScalarField::tabulated(p.grid, g);
  p.kernel = Kernel::tent(0.2);
  const auto rep = limit_dI(p, {1e-4, 1e-3, 1e-2, 1e-1});
  EXPECT_TRUE(std::isinf(rep.target_small));
  EXPECT_GT(rep.points.front().r0, 1e3);
}

TEST(LimitDI, RequiresThreeDecades) {
  EXPECT_THROW(limit_dI(constants(2, 1, 1, 1), {0.1, 1.0, 10.0}), InvalidArgument);
  EXPECT_THROW(limit_dI(constants(2, 1, 1, 1), {1.0, 0.1, 1e-4}), InvalidArgument);
}

TEST(LimitK, PositiveMGoesToZero) {
  SISParameters p = constants(2, 1, 1, 1, 32, Kernel::tent(0.4));
  p.beta = ScalarField::gaussian_bump(p.grid, 0.5, 1.0, {0.3, 0.0}, 0.1);
  const auto rep = limit_K(p, log_grid(1e-4, 1.0, 4));
  EXPECT_EQ(rep.target_small, 0.0);
  EXPECT_LT(rep.points.front().r0, 1e-2);
  EXPECT_TRUE(rep.monotone);
  EXPECT_TRUE(rep.strictly_monotone);
  EXPECT_FALSE(rep.bounds);
}

TEST(LimitK, ConstantsLargeKTarget) {
  const auto rep = limit_K(constants(2, 1, 1, 1), {1e-1, 1.0, 10.0, 100.0, 1e3});
  EXPECT_NEAR(rep.target_large, 2.0, 1e-10);
  EXPECT_LE(std::abs(rep.points.back().r0 / 2.0 - 1.0), 0.01);
}

TEST(LimitK, SingleZeroNodeSandwich) {
  const int n = 128;
  SISParameters p = constants(2, 1, 1, 1e-6, n);
  const int j0 = 64;
  const double x0 = (j0 + 0.5) / n;
  p.m_sat = ScalarField::from_function(p.grid, [&](const Point& x) { return std::abs(x[0] - x0); });
  ASSERT_EQ(zero_set(p.m_sat), std::vector<int>{j0});
  const double target = 2.0 / (1.0 * 0.5 + 1.0);
  const double r0 = r0_value(p);
  EXPECT_LE(std::abs(r0 / target - 1.0), 0.05);
  EXPECT_GE(r0, 0.9 * target);
  const auto b = degenerate_sandwich(p);
  EXPECT_NEAR(b.lower, target, 1e-12);
  EXPECT_LE(b.lower, b.upper);
  EXPECT_LE(r0, b.upper * 1.05);
}

TEST(DegenerateSandwich, BetaZeroOnSigma) {
  SISParameters p = constants(1, 1, 1, 1e-3, 16);
  std::vector<double> m(16, 0.5), beta(16, 1.0);
  m[3] = 0.0;
  beta[3] = 0.0;
  p.m_sat = ScalarField::tabulated(p.grid, m);
  p.beta = ScalarField::tabulated(p.grid, beta);
  const auto b = degenerate_sandwich(p);
  EXPECT_EQ(b.lower, 0.0);
  EXPECT_EQ(b.upper, 0.0);
}

TEST(DegenerateSandwich, TwoPointSigmaEnumeration) {
  SISParameters p = constants(1, 1, 1, 1e-3, 16, Kernel::tent(0.3));
  std::vector<double> m(16, 0.5), beta(16, 1.0);
  m[2] = m[11] = 0.0;
  beta[2] = 1.5;
  beta[11] = 3.0;
  p.m_sat = ScalarField::tabulated(p.grid, m);
  p.beta = ScalarField::tabulated(p.grid, beta);
  p.d_i = 0.7;
  const Eigen::VectorXd mass = kernel_row_masses(p.grid, p.kernel);
  const double ref = std::max(1.5 / (0.7 * mass[2] + 1.0), 3.0 / (0.7 * mass[11] + 1.0));
  const auto b = degenerate_sandwich(p);
  EXPECT_DOUBLE_EQ(b.lower, ref);
  EXPECT_NEAR(b.upper, 3.0 / -sis_s_infinity(p), 1e-12);
  EXPECT_THROW(degenerate_sandwich(constants(1, 1, 1, 1)), InvalidArgument);
}

TEST(PointwiseBound, HoldsOnThreeParameterSets) {
  SISParameters a = constants(2, 1, 1, 1);
  SISParameters b = constants(1, 1, 1, 1, 64, Kernel::tent(0.3));
  b.beta = ScalarField::gaussian_bump(b.grid, 0.5, 2.0, {0.5, 0.0}, 0.15);
  b.d_i = 0.1;
  SISParameters c = constants(2, 1, 1, 1e-2, 64);
  c.m_sat = ScalarField::affine(c.grid, -0.5, {1.0, 0.0});
  c.m_sat = ScalarField::from_function(c.grid, [](const Point& x) { return std::abs(x[0] - 0.5); });
  for (const auto* p : {&a, &b, &c}) {
    const double r0 = r0_value(*p);
    EXPECT_TRUE(satisfies_pointwise_bound(*p, r0)) << r0 << " vs " << pointwise_lower_bound(*p);
  }
}

TEST(LogGrid, ThreeDecadesHas25Points) {
  const auto g = log_grid(1e-3, 1.0);
  ASSERT_EQ(g.size(), 25u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-3);
  EXPECT_DOUBLE_EQ(g.back(), 1.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], std::pow(10.0, 0.125), 1e-12);
  EXPECT_THROW(log_grid(1.0, 0.1), InvalidArgument);
  EXPECT_THROW(log_grid(0.0, 1.0), InvalidArgument);
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  SISParameters p = constants(1, 1, 1, 1, 48, Kernel::tent(0.25));
  p.beta = ScalarField::affine(p.grid, 1.0, {1.0, 0.0});
  SweepOptions one, four;
  four.threads = 4;
  const auto a = limit_dI(p, log_grid(1e-3, 1.0, 4), one);
  const auto b = limit_dI(p, log_grid(1e-3, 1.0, 4), four);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) EXPECT_EQ(a.points[i].r0, b.points[i].r0);
}
