#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rsbound/kronig_penney.hpp"
#include "rsbound/scatterer.hpp"
#include "rsbound/scattering.hpp"

using namespace rsbound;
using std::numbers::pi;

namespace {

const Complex I{0.0, 1.0};

ScatteringData solve(const SingleSitePotential& p, double alpha, double E, int steps = kDefaultSteps) {
  return scattering_from_fundamental(fundamental_matrix(p, alpha, E, steps), E);
}

std::vector<SingleSitePotential> test_shapes() {
  return {shapes::square(0.5, 1.0), shapes::square(1.0, 1.0), shapes::gaussian_truncated(0.1, 1.0),
          shapes::cosine_bump(1.0), shapes::ramp(1.0)};
}

}  // namespace

TEST(FundamentalMatrix, FreeHalfPeriod) {
  const auto m = fundamental_matrix(shapes::square(), 0.0, pi * pi);
  EXPECT_NEAR(m.m11, -1.0, 1e-12);
  EXPECT_NEAR(m.m12, 0.0, 1e-12);
  EXPECT_NEAR(m.m21, 0.0, 1e-12);
  EXPECT_NEAR(m.m22, -1.0, 1e-12);
}

TEST(FundamentalMatrix, Wronskian) {
  EXPECT_NEAR(fundamental_matrix(shapes::square(), 5.0, 2.0, 1024).det(), 1.0, 1e-9);
  EXPECT_NEAR(fundamental_matrix(shapes::gaussian_truncated(), 40.0, 0.01).det(), 1.0, 1e-9);
}

TEST(FundamentalMatrix, ConstantPotentialClosedForm) {
  // f = 1 on the whole cell, alpha = 1, E = 2: k' = 1 over unit length
  const auto m = fundamental_matrix(shapes::square(1.0, 1.0), 1.0, 2.0);
  EXPECT_NEAR(m.m11, std::cos(1.0), 1e-12);
  EXPECT_NEAR(m.m12, std::sin(1.0), 1e-12);
  EXPECT_NEAR(m.m21, -std::sin(1.0), 1e-12);
  EXPECT_NEAR(m.m22, std::cos(1.0), 1e-12);
}

TEST(FundamentalMatrix, AgreesWithRk4OnSmoothShape) {
  const auto g = shapes::gaussian_truncated(0.15, 1.0);
  for (double E : {0.3, 4.0, 50.0}) {
    const auto m = fundamental_matrix(g, 3.0, E, 2048);
    const auto o = oracle::rk4_transfer([&](double x) { return 3.0 * g(x); }, E, -0.5, 0.5, 20000);
    EXPECT_NEAR(m.m11, o.a, 1e-8);
    EXPECT_NEAR(m.m12, o.b, 1e-8);
    EXPECT_NEAR(m.m21, o.c, 1e-7);
    EXPECT_NEAR(m.m22, o.d, 1e-8);
  }
}

TEST(FundamentalMatrix, FourthOrderConvergence) {
  // 16 linear segments; step counts that are multiples of 16 keep every
  // step inside one smooth piece
  const auto g = shapes::cosine_bump(20.0, 16);
  auto t = [&](int steps) { return solve(g, 1.0, 3.0, steps).T; };
  const Complex t1 = t(32), t2 = t(64), t3 = t(128);
  const double order = std::log2(std::abs(t1 - t2) / std::abs(t2 - t3));
  EXPECT_GE(order, 3.5);
}

TEST(FundamentalMatrix, Errors) {
  EXPECT_THROW(fundamental_matrix(shapes::square(), 1.0, 0.0), std::domain_error);
  EXPECT_THROW(fundamental_matrix(shapes::square(), 1.0, -1.0), std::domain_error);
  EXPECT_THROW(fundamental_matrix(FormalDelta{}, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(fundamental_matrix(shapes::square(), 1.0, 1.0, 8), std::invalid_argument);
}

TEST(ScatteringFromFundamental, FreePropagatorIsTransparent) {
  for (double E : {0.01, 1.0, 77.0}) {
    const auto s = scattering_from_fundamental(free_propagator(std::sqrt(E), 1.0), E);
    EXPECT_NEAR(std::abs(s.T - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(s.R), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(s.L), 0.0, 1e-12);
  }
}

TEST(ScatteringFromFundamental, SquareBarrierUnitarityAndClosedForm) {
  for (double w : {0.5, 1.0}) {
    for (double E : {0.5, 2.0, 9.0}) {
      const auto s = solve(shapes::square(w, 1.0), 1.0, E);
      EXPECT_LT(s.unitarity_defect(), 1e-9);
      const auto o = oracle::rectangular_barrier(1.0, w, E);
      EXPECT_NEAR(std::abs(s.T - o.T), 0.0, 1e-10) << "w=" << w << " E=" << E;
      EXPECT_NEAR(std::abs(s.R - o.R), 0.0, 1e-10);
      EXPECT_NEAR(std::abs(s.L - o.L), 0.0, 1e-10);
    }
  }
}

TEST(ScatteringFromFundamental, TallBarrierTunnelling) {
  const auto s = solve(shapes::square(0.5, 1.0), 200.0, 1.0);
  const auto o = oracle::rectangular_barrier(200.0, 0.5, 1.0);
  EXPECT_NEAR(std::abs(s.T - o.T) / std::abs(o.T), 0.0, 5e-9);
  EXPECT_LT(s.unitarity_defect(), 1e-9);
}

TEST(ScatteringFromFundamental, AsymmetricShapeAgainstRk4Matching) {
  const auto g = shapes::ramp(1.0);
  const double E = 2.0, alpha = 4.0;
  const auto s = solve(g, alpha, E, 4096);
  // clamp: rounding in x + h must not step off the support and drop the wall
  const auto m = oracle::rk4_transfer([&](double x) { return alpha * g(std::clamp(x, -0.5, 0.5)); }, E, -0.5, 0.5,
                                      10000);
  const auto o = oracle::match(m, std::sqrt(E), -0.5, 0.5);
  EXPECT_NEAR(std::abs(s.T - o.T), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(s.R - o.R), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(s.L - o.L), 0.0, 1e-9);
  EXPECT_GT(std::abs(s.R - s.L), 1e-3);  // the two reflections genuinely differ
}

TEST(ScatteringFromFundamental, Errors) {
  const RealMatrix2 bad{2.0, 0.0, 0.0, 2.0};
  EXPECT_THROW(scattering_from_fundamental(bad, 1.0), ConsistencyError);
  EXPECT_THROW(scattering_from_fundamental(RealMatrix2{}, 0.0), std::domain_error);
}

TEST(ScatteringInvariants, UnitarityAcrossEnergiesAndShapes) {
  for (const auto& p : test_shapes())
    for (double alpha : {-10.0, -1.0, 0.5, 3.0, 25.0})
      for (double E : {1e-2, 0.3, 1.0, 17.0, 1e3, 1e6}) {
        const auto s = solve(p, alpha, E);
        EXPECT_LT(s.unitarity_defect(), 1e-9) << "alpha=" << alpha << " E=" << E;
        // det of a product of 1/|T| sized entries: relative to |T|^-2
        const double scale = 1.0 / std::norm(s.T);
        EXPECT_NEAR(std::abs(lambda_matrix(s).det() - 1.0), 0.0, 1e-9 * scale);
        EXPECT_NEAR(std::abs(lambda_tilde(s).det() - 1.0), 0.0, 1e-9 * scale);
      }
}

TEST(ScatteringInvariants, ZeroCouplingIsFree) {
  for (const auto& p : test_shapes()) {
    const auto s = Scatterer(p)(0.0, 3.0);
    EXPECT_EQ(s.T, Complex(1.0));
    EXPECT_EQ(s.R, Complex(0.0));
    EXPECT_EQ(max_abs_diff(lambda_matrix(s), ComplexMatrix2::identity()), 0.0);
    const auto direct = solve(p, 0.0, 3.0);
    EXPECT_NEAR(std::abs(direct.T - 1.0), 0.0, 1e-12);
  }
}

TEST(ScatteringInvariants, EvenShapeHasEqualReflections) {
  for (const auto& p : {shapes::gaussian_truncated(), shapes::cosine_bump(), shapes::square()}) {
    const auto s = solve(p, 5.0, 2.5);
    EXPECT_NEAR(std::abs(s.R - s.L), 0.0, 1e-9);
  }
}

TEST(ScatteringInvariants, HighEnergyDecay) {
  const auto g = shapes::gaussian_truncated(0.1, 1.0);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int m = 12;
  for (int i = 0; i < m; ++i) {
    const double E = 1e2 * std::pow(1e4, i / double(m - 1));
    const auto s = solve(g, 2.0, E);
    const double x = std::log(E), y = std::log(std::abs(s.T - 1.0) + std::abs(s.R));
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  EXPECT_LE(slope, -0.45);
}

TEST(LambdaMatrix, Examples) {
  EXPECT_EQ(max_abs_diff(lambda_matrix({1.0, 1.0, 0.0, 0.0}), ComplexMatrix2::identity()), 0.0);
  const auto kp = kp_scattering(2.0, 1.0);
  const auto lam = lambda_matrix(kp);
  EXPECT_NEAR(std::abs(lam.m11 - Complex(1.0, 1.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(lam.det() - 1.0), 0.0, 1e-14);
  ScatteringData zero{1.0, 0.0, 1.0, 1.0};
  EXPECT_THROW(lambda_matrix(zero), std::domain_error);
}

TEST(LambdaTilde, Examples) {
  const double E = 2.3;
  const auto free = lambda_tilde({E, 1.0, 0.0, 0.0});
  EXPECT_NEAR(max_abs_diff(free, phase_matrix(E, 1.0)), 0.0, 1e-15);
  const auto kp = lambda_tilde(kp_scattering(2.0, 1.0));
  EXPECT_NEAR(std::abs(kp.m11 - std::exp(I) * Complex(1.0, 1.0)), 0.0, 1e-14);
}

TEST(LambdaTilde, UnimodularForRandomData) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    // random unitary-consistent data: T = cos(t) e^{ia}, R = i sin(t) e^{ib}, L = i sin(t) e^{i(2a-b)}
    const double t = 1.5 * u(rng), a = pi * u(rng), b = pi * u(rng), E = 0.1 + 10 * std::abs(u(rng));
    const ScatteringData s{E, std::polar(std::cos(t), a), I * std::polar(std::sin(t), b),
                           I * std::polar(std::sin(t), 2 * a - b)};
    ASSERT_LT(s.unitarity_defect(), 1e-12);
    EXPECT_NEAR(std::abs(lambda_matrix(s).det() - 1.0), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(lambda_tilde(s).det() - 1.0), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(site_factor(s).det() - 1.0), 0.0, 1e-9);
    const auto back = scattering_from_lambda(lambda_matrix(s), E);
    EXPECT_NEAR(std::abs(back.T - s.T) + std::abs(back.R - s.R) + std::abs(back.L - s.L), 0.0, 1e-12);
  }
}

TEST(SingleSitePhaseShift, ZeroCouplingIsZero) {
  const std::vector<double> grid{0.5, 1.0, 10.0, 1e6};
  for (const auto& pt : single_site_phase_shift(shapes::square(), 0.0, grid)) EXPECT_EQ(pt.xi, 0.0);
}

TEST(SingleSitePhaseShift, DeltaClosedForm) {
  const Scatterer delta(FormalDelta{});
  const std::vector<double> grid{1.0};
  EXPECT_NEAR(single_site_xi(delta, 2.0, grid)[0], 0.25, 1e-15);
  // phase route through arg T agrees with the arctan closed form
  const auto grid2 = log_energy_grid(0.05, 1e6, 60);
  const auto pts = single_site_phase_shift(delta, 2.0, grid2);
  for (const auto& pt : pts) EXPECT_NEAR(pt.xi, kp_xi(2.0, pt.energy), 1e-12);
}

TEST(SingleSitePhaseShift, NarrowGridApproximatesDelta) {
  const Scatterer g(shapes::delta_approximant(1e-3));
  const std::vector<double> E{1.0};
  EXPECT_NEAR(single_site_xi(g, 2.0, E)[0], 0.25, 1e-2);
}

TEST(SingleSitePhaseShift, TallBarrierWindsPastHalfTurn) {
  // a strong attractive well binds states, so the phase at low E leaves (-pi/2, pi/2)
  const Scatterer g(shapes::square(0.5, 1.0));
  const std::vector<double> E{0.05, 1.0, 30.0};
  const auto xi = single_site_xi(g, -200.0, E);
  EXPECT_LT(xi[0], -1.0);
  // continuity: monotone trend toward zero at high E
  EXPECT_LT(std::abs(xi[2]), std::abs(xi[0]));
}

TEST(UnwrapPhase, FailsWhenRefinementCannotResolve) {
  // a genuine half-turn jump never resolves under bisection
  const std::vector<double> grid{1.0, 2.0};
  auto raw = [](double E) { return E < std::sqrt(2.0) * 1.0001 ? 0.0 : pi; };
  EXPECT_THROW(unwrap_phase(grid, raw, 3), UnwrapError);
  EXPECT_THROW(unwrap_phase(std::vector<double>{2.0, 1.0}, raw), std::invalid_argument);
}

TEST(UnwrapPhase, FollowsLinearWinding) {
  const auto grid = linear_energy_grid(1.0, 2.0, 41);
  auto raw = [](double E) { return wrap_to_pi(-20.0 * (2.0 - E)); };
  const auto out = unwrap_phase(grid, raw);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(out[i], -20.0 * (2.0 - grid[i]), 1e-12);
}
