#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "rsbound/ensemble.hpp"
#include "rsbound/kronig_penney.hpp"
#include "rsbound/montecarlo.hpp"
#include "rsbound/phase.hpp"

using namespace rsbound;
using std::numbers::pi;

namespace {

const Scatterer kDelta{FormalDelta{}};
const auto kPm1 = CouplingDistribution::symmetric_bernoulli(1.0);
const auto kTwo = CouplingDistribution::point_mass(2.0);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

TEST(Expect, Examples) {
  EXPECT_EQ(expect(CouplingDistribution::point_mass(1.7), [](double a) { return a * a; }), 1.7 * 1.7);
  EXPECT_EQ(expect(kPm1, [](double a) { return a; }), 0.0);
  EXPECT_NEAR(expect(CouplingDistribution::uniform(0.0, 1.0), [](double a) { return a * a; }), 1.0 / 3.0, 1e-12);
}

TEST(Expect, QuadratureDoublingIsStable) {
  const auto kappa = CouplingDistribution::density(
      -1.0, 2.0, [](double a) { return (1.0 + 0.3 * a * a) / 3.9; }, 16);
  for (int deg = 0; deg <= 8; ++deg) {
    auto g = [deg](double a) { return std::pow(a, deg) - 0.5 * std::pow(a, deg / 2); };
    EXPECT_LT(std::abs(expect(kappa, g) - expect(kappa.with_order(32), g)), 1e-10) << deg;
  }
}

TEST(Expect, RejectsUnnormalisedKappa) {
  EXPECT_THROW(CouplingDistribution::discrete({{1.0, 0.5}, {2.0, 0.4}}), std::invalid_argument);
  EXPECT_THROW(CouplingDistribution::discrete({{1.0, 1.5}, {2.0, -0.5}}), std::invalid_argument);
  EXPECT_THROW(CouplingDistribution::density(0.0, 1.0, [](double) { return 2.0; }), std::invalid_argument);
}

TEST(EnsembleMatrices, FreeEnsemble) {
  const auto m = ensemble_matrices(CouplingDistribution::point_mass(0.0), kDelta, 2.0);
  EXPECT_EQ(m.a, 1.0);
  EXPECT_EQ(m.b, Complex(0.0));
  EXPECT_EQ(m.beta_plus, 1.0);
  EXPECT_EQ(m.beta_minus, 1.0);
  EXPECT_EQ(m.gamma_tilde, 0.0);
  const auto g = ensemble_matrices(CouplingDistribution::point_mass(0.0), Scatterer(shapes::ramp()), 2.0);
  EXPECT_EQ(g.beta_plus, 1.0);
  EXPECT_EQ(g.b, Complex(0.0));
}

TEST(EnsembleMatrices, PointMassAlpha2) {
  const auto m = ensemble_matrices(kTwo, kDelta, 1.0);
  EXPECT_NEAR(m.a, 3.0, 1e-14);
  EXPECT_NEAR(std::abs(m.b), 2.0 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(m.beta_plus, 3.0 + 2.0 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(m.gamma_tilde, 0.881373587019543, 1e-13);
  // deterministic chain: exact periodic gamma sits below the bound
  EXPECT_LT(oracle::periodic_kp_gamma(2.0, 1.0), m.gamma_tilde);
  EXPECT_NEAR(oracle::periodic_kp_gamma(2.0, 1.0), std::acosh(std::cos(1.0) + std::sin(1.0)), 1e-14);
}

TEST(EnsembleMatrices, SymmetricBernoulli) {
  const auto m = ensemble_matrices(kPm1, kDelta, 1.0);
  EXPECT_NEAR(m.a, 1.5, 1e-14);
  EXPECT_NEAR(std::abs(m.b), 0.5, 1e-14);
  EXPECT_NEAR(m.beta_plus, 2.0, 1e-14);
  EXPECT_NEAR(m.gamma_tilde, 0.5 * std::log(2.0), 1e-14);
}

TEST(EnsembleMatrices, DisplayedGramHasSameSpectrum) {
  for (double E : {0.3, 1.0, 12.0}) {
    const auto m = ensemble_matrices(kPm1, kDelta, E);
    const auto g = expected_lambda_tilde_gram(kPm1, kDelta, E);
    const auto [lo, hi] = hermitian_eigenvalues(g);
    EXPECT_NEAR(hi, m.beta_plus, 1e-12);
    EXPECT_NEAR(lo, m.beta_minus, 1e-12);
  }
}

TEST(EnsembleMatrices, Errors) {
  auto opaque = [](double, double E) { return ScatteringData{E, 0.0, 1.0, 1.0}; };
  EXPECT_THROW(ensemble_matrices(kPm1, opaque, 1.0), std::domain_error);
  EXPECT_THROW(ensemble_matrices(kPm1, kDelta, 0.0), std::domain_error);
  // non-unitary data breaks the agreement of the two routes
  auto broken = [](double, double E) { return ScatteringData{E, 0.5, 0.5, -0.2}; };
  EXPECT_THROW(ensemble_matrices(kTwo, broken, 1.0), ConsistencyError);
}

TEST(EnsembleMatrices, Invariants) {
  const std::vector<Scatterer> scats{kDelta, Scatterer(shapes::square()), Scatterer(shapes::ramp(2.0))};
  const std::vector<CouplingDistribution> kappas{kPm1, kTwo, CouplingDistribution::uniform(-2.0, 3.0, 16),
                                                 CouplingDistribution::symmetric_bernoulli(0.5)};
  for (const auto& s : scats)
    for (const auto& k : kappas)
      for (double E : {0.05, 1.0, 40.0, 1e4}) {
        const auto m = ensemble_matrices(k, s, E);
        EXPECT_GE(m.beta_plus, 1.0 - 1e-12);
        EXPECT_GE(m.beta_minus, -1e-10 * m.a);
        EXPECT_EQ(m.A.m11, m.A.m22);
        EXPECT_EQ(m.A.m21, std::conj(m.A.m12));
        EXPECT_GE(m.gamma_tilde, 0.0);
        EXPECT_NEAR(m.gamma_tilde, 0.5 * std::log(m.beta_plus), 1e-15);
      }
}

TEST(EnsembleMatrices, TailDecay) {
  const auto grid = log_energy_grid(1e2, 1e6, 20);
  struct Case {
    CouplingDistribution kappa;
    Scatterer scat;
    double gamma_slope;
  };
  const std::vector<Case> cases{{kTwo, kDelta, -0.45},
                                {kPm1, kDelta, -0.9},
                                {CouplingDistribution::uniform(0.0, 3.0, 16), Scatterer(shapes::gaussian_truncated()), -0.45}};
  for (const auto& c : cases) {
    std::vector<double> g, r;
    for (double E : grid) {
      g.push_back(ensemble_matrices(c.kappa, c.scat, E).gamma_tilde);
      r.push_back(r_of_E(c.kappa, c.scat, E).r);
    }
    EXPECT_LE(loglog_slope(grid, g), c.gamma_slope);
    EXPECT_LE(loglog_slope(grid, r), -0.45);
  }
}

TEST(ARecursion, Examples) {
  const auto free = a_recursion(CouplingDistribution::point_mass(0.0), kDelta, 1.3, 7);
  EXPECT_NEAR(max_abs_diff(free, ComplexMatrix2::identity()), 0.0, 1e-14);
  EXPECT_NEAR(max_abs_diff(a_recursion(kTwo, kDelta, 1.0, 1), ensemble_matrices(kTwo, kDelta, 1.0).A), 0.0, 1e-12);
  EXPECT_THROW(a_recursion(kPm1, kDelta, 1.0, -1), std::invalid_argument);
}

TEST(ARecursion, TraceMatchesEnumerationAndSandwich) {
  const auto m = ensemble_matrices(kPm1, kDelta, 1.0);
  const double tr = a_recursion(kPm1, kDelta, 1.0, 3).trace().real();
  const double oracle_tr = oracle::enumerate_trace({{-1.0, 0.5}, {1.0, 0.5}}, 1.0, 1);
  EXPECT_NEAR(tr, oracle_tr, 1e-12);
  EXPECT_NEAR(tr, exact_expectation_trace(kPm1, kDelta, 1.0, 1), 1e-12);
  EXPECT_LE(tr, 2.0 * std::pow(m.beta_plus, 3) + 1e-12);
  EXPECT_GE(tr, 2.0 * std::pow(m.beta_minus, 3) - 1e-12);
  EXPECT_LE(tr, 10.71875);
}

TEST(ARecursion, HermitianPositive) {
  const auto kappa = CouplingDistribution::discrete({{-1.0, 0.25}, {0.5, 0.25}, {2.0, 0.5}});
  for (int j : {1, 2, 5, 9}) {
    const auto a = a_recursion(kappa, Scatterer(shapes::ramp()), 2.0, j);
    EXPECT_NEAR(std::abs(a.m12 - std::conj(a.m21)), 0.0, 1e-10 * a.max_abs());
    const auto [lo, hi] = hermitian_eigenvalues(a);
    EXPECT_GE(lo, -1e-10 * hi);
  }
}

TEST(MeanSingleSiteXi, Examples) {
  EXPECT_EQ(mean_single_site_xi(CouplingDistribution::point_mass(0.0), kDelta, 1.0), 0.0);
  EXPECT_NEAR(mean_single_site_xi(kTwo, kDelta, 1.0), 0.25, 1e-15);
  EXPECT_NEAR(mean_single_site_xi(CouplingDistribution::symmetric_bernoulli(2.0), kDelta, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(mean_single_site_xi(kTwo, [](double a) { return kp_xi(a, 1.0); }), 0.25, 1e-15);
}

TEST(MeanSingleSiteXi, SignFollowsSupport) {
  const auto energies = log_energy_grid(0.05, 1e4, 25);
  for (const auto& scat : {kDelta, Scatterer(shapes::square()), Scatterer(shapes::ramp())}) {
    const auto pos = mean_single_site_xi(CouplingDistribution::uniform(0.0, 5.0, 8), scat, energies);
    const auto neg = mean_single_site_xi(CouplingDistribution::uniform(-5.0, 0.0, 8), scat, energies);
    for (std::size_t i = 0; i < energies.size(); ++i) {
      EXPECT_GE(pos[i], 0.0) << energies[i];
      EXPECT_LE(neg[i], 0.0) << energies[i];
    }
  }
}

TEST(ROfE, Examples) {
  EXPECT_EQ(r_of_E(CouplingDistribution::point_mass(0.0), kDelta, 3.0).r, 0.0);
  const auto one = r_of_E(kTwo, kDelta, 1.0);
  EXPECT_NEAR(one.mean_ratio, (1 / std::sqrt(2.0)) / (1 - 1 / std::sqrt(2.0)), 1e-14);
  EXPECT_GT(one.mean_ratio / pi, 0.5);
  EXPECT_EQ(one.r, 0.5);
  const auto hundred = r_of_E(kTwo, kDelta, 100.0);
  const double abs_r = 0.1 / std::sqrt(1.01);
  EXPECT_NEAR(hundred.r, abs_r / (1 - abs_r) / pi, 1e-15);
  EXPECT_NEAR(hundred.r, 0.035173, 1e-6);
  EXPECT_LE(hundred.r_pointwise, hundred.r + 1e-15);
}

TEST(ROfE, TotalReflectionSaturates) {
  std::vector<NodeData> nodes{{1.0, 1.0, {1.0, 0.0, 1.0, 1.0}}};
  const auto env = r_of_E(nodes);
  EXPECT_TRUE(std::isinf(env.mean_ratio));
  EXPECT_EQ(env.r, 0.5);
  EXPECT_EQ(env.r_pointwise, 0.5);
}

TEST(IdsEnvelope, Examples) {
  const auto free = ids_envelope(CouplingDistribution::point_mass(0.0), kDelta, pi * pi);
  EXPECT_NEAR(free.lower, 1.0, 1e-15);
  EXPECT_NEAR(free.upper, 1.0, 1e-15);

  const auto one = ids_envelope(kTwo, kDelta, 1.0);
  EXPECT_NEAR(one.lower, 1 / pi - 0.75, 1e-14);
  EXPECT_NEAR(one.upper, 1 / pi + 0.25, 1e-14);
  EXPECT_NEAR(one.lower, -0.4317, 1e-4);
  EXPECT_NEAR(one.upper, 0.5683, 1e-4);
  EXPECT_NEAR(one.crude_lower, 1 / pi - 1.25, 1e-14);

  const auto hundred = ids_envelope(kTwo, kDelta, 100.0);
  EXPECT_NEAR(hundred.xi_mean, std::atan(0.1) / pi, 1e-15);
  EXPECT_NEAR(hundred.lower, 3.116200, 1e-6);
  EXPECT_NEAR(hundred.upper, 3.186546, 1e-6);
}

TEST(IdsEnvelope, Ordered) {
  for (double E : log_energy_grid(1e-3, 1e5, 30)) {
    const auto env = ids_envelope(CouplingDistribution::uniform(-4.0, 4.0, 8), Scatterer(shapes::square()), E);
    EXPECT_LE(env.lower, env.upper);
    EXPECT_LE(env.crude_lower, env.lower);
    EXPECT_GE(env.crude_upper, env.upper);
  }
}
