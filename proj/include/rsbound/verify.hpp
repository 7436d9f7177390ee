#pragma once

// Checks of the bounds and asymptotics over energy sweeps: Lyapunov upper
// bound, spectral shift / IDS envelope, the Thouless relation, tail decay
// fits and the delta-limit convergence of grid approximants.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "rsbound/coupling.hpp"
#include "rsbound/ensemble.hpp"
#include "rsbound/kronig_penney.hpp"
#include "rsbound/montecarlo.hpp"
#include "rsbound/scatterer.hpp"

namespace rsbound {

inline constexpr double kBoundSlack = 1e-12;

struct McParams {
  std::size_t n_gamma = 1000;  // chain half-length for the Lyapunov exponent
  std::size_t n_xi = kDefaultXiSites;
  std::size_t realizations = 40;
  std::uint64_t seed = 20240601;
  unsigned threads = 1;
  XiRoute xi_route = XiRoute::additive;
};

struct BoundReportOptions {
  double sigmas = 3.0;
  double gamma_tilde_scale = 1.0;  // test hook: < 1 corrupts the bound
};

struct BoundRow {
  double energy = 0.0;
  MonteCarloEstimate gamma;
  double gamma_tilde = 0.0;
  double beta_plus = 1.0;
  double beta_minus = 1.0;
  bool gamma_pass = false;

  MonteCarloEstimate xi;
  double xi_single_mean = 0.0;
  double r = 0.0;
  double r_pointwise = 0.0;
  bool xi_pass = false;

  double n_mc = 0.0;
  double n_lower = 0.0;
  double n_upper = 0.0;
  double n_free = 0.0;
  bool ids_pass = false;

  bool pass() const { return gamma_pass && xi_pass && ids_pass; }
};

/// gamma_hat + k sigma <= gamma_tilde, and xi_hat inside E{xi} -+ r widened by k sigma.
inline std::vector<BoundRow> bound_report(const CouplingDistribution& kappa, const Scatterer& scat,
                                          std::span<const double> energies, const McParams& mc,
                                          const BoundReportOptions& opt = {}) {
  const auto xi = xi_mc(kappa, scat, energies, mc.n_xi, mc.realizations, mc.seed, mc.threads, mc.xi_route);
  const auto xi_single = mean_single_site_xi(kappa, scat, energies);
  std::vector<BoundRow> rows;
  rows.reserve(energies.size());
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const double E = energies[i];
    BoundRow row;
    row.energy = E;
    const auto nodes = node_data(kappa, scat, E);
    const auto em = ensemble_matrices(nodes, E);
    row.beta_plus = em.beta_plus;
    row.beta_minus = em.beta_minus;
    row.gamma_tilde = em.gamma_tilde * opt.gamma_tilde_scale;
    row.gamma = lyapunov_mc(kappa, scat, E, mc.n_gamma, mc.realizations, mc.seed, mc.threads);
    row.gamma_pass = row.gamma.mean + opt.sigmas * row.gamma.std_error <= row.gamma_tilde + kBoundSlack;

    const auto renv = r_of_E(nodes);
    row.xi = xi[i].xi;
    row.xi_single_mean = xi_single[i];
    row.r = renv.r;
    row.r_pointwise = renv.r_pointwise;
    const double widen = opt.sigmas * row.xi.std_error + kBoundSlack;
    row.xi_pass = std::abs(row.xi.mean - row.xi_single_mean) <= row.r + widen;

    const auto env = ids_envelope(E, row.xi_single_mean, row.r);
    row.n_free = env.n_free;
    row.n_mc = env.n_free - row.xi.mean;
    row.n_lower = env.lower;
    row.n_upper = env.upper;
    row.ids_pass = row.n_mc >= row.n_lower - widen && row.n_mc <= row.n_upper + widen;
    rows.push_back(row);
  }
  return rows;
}

/// Energy grid for the Thouless integral: uniform spacing h on (0, linear_max]
/// with e_check a node, then log spacing up to e_max.
struct ThoulessGrid {
  double h = 0.005;
  double linear_max = 8.0;
  double e_max = 1e4;
  int per_decade = 200;

  ThoulessGrid refined() const { return {0.5 * h, linear_max, e_max, 2 * per_decade}; }
};

struct ThoulessParams {
  ThoulessGrid grid;
  std::size_t n_xi = 2000;
  std::size_t n_gamma = 2000;
  std::size_t realizations = 4;
  std::uint64_t seed = 20240601;
  unsigned threads = 1;
};

inline std::vector<double> thouless_energy_grid(double e_check, const ThoulessGrid& g) {
  if (!(g.h > 0.0) || !(g.linear_max > e_check) || !(g.e_max > g.linear_max) || g.per_decade < 1)
    throw std::invalid_argument("thouless grid: need h > 0, e_check < linear_max < e_max");
  std::vector<double> grid;
  const auto below = static_cast<long>(std::floor(e_check / g.h - 1e-9));
  for (long i = -below; e_check + static_cast<double>(i) * g.h <= g.linear_max + 1e-12; ++i) {
    const double E = e_check + static_cast<double>(i) * g.h;
    if (E > 0.0) grid.push_back(E);
  }
  const double top = grid.back();
  const auto count = static_cast<std::size_t>(std::ceil(std::log10(g.e_max / top) * g.per_decade)) + 1;
  const auto tail = log_energy_grid(top, g.e_max, std::max<std::size_t>(count, 2));
  grid.insert(grid.end(), tail.begin() + 1, tail.end());
  return grid;
}

struct ThoulessResult {
  double e_check = 0.0;
  double lhs = 0.0;  // gamma_hat(E) - gamma_0(E)
  double rhs = 0.0;  // -int log|E - E'| dxi(E')
  double pv = 0.0;
  double tail = 0.0;
  double residual = 0.0;
  std::size_t grid_points = 0;
};

/// Right side from a tabulated xi on `grid` (xi(0) = 0): principal value
/// integral of xi(E')/(E' - E) with a symmetric window of two cells, plus the
/// tail beyond the grid from xi ~ c / sqrt(E').
inline double thouless_rhs(std::span<const double> grid, std::span<const double> xi, double e_check,
                           double* pv_out = nullptr, double* tail_out = nullptr) {
  const auto it = std::lower_bound(grid.begin(), grid.end(), e_check * (1.0 - 1e-12));
  if (it == grid.end() || std::abs(*it - e_check) > 1e-9 * e_check)
    throw std::invalid_argument("thouless_rhs: e_check must be a grid node");
  const auto c = static_cast<std::size_t>(it - grid.begin());
  if (c < 2 || c + 2 >= grid.size())
    throw std::invalid_argument("thouless_rhs: e_check too close to the grid edge (PV window truncated)");
  const double h = grid[c] - grid[c - 1];
  for (std::size_t j = c - 2; j < c + 2; ++j)
    if (std::abs((grid[j + 1] - grid[j]) - h) > 1e-9 * h)
      throw std::invalid_argument("thouless_rhs: grid must be uniform around e_check");

  auto g = [&](std::size_t j) { return xi[j] / (grid[j] - e_check); };
  double pv = 0.0;
  // (0, grid[0]] with xi(0) = 0
  pv += 0.5 * grid[0] * g(0);
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    if (j + 1 > c - 2 && j < c + 2) continue;  // inside the window
    pv += 0.5 * (grid[j + 1] - grid[j]) * (g(j) + g(j + 1));
  }
  // window: the xi(E) part integrates to zero by symmetry
  auto d = [&](std::size_t j) {
    if (j == c) return (xi[c + 1] - xi[c - 1]) / (2.0 * h);
    return (xi[j] - xi[c]) / (grid[j] - e_check);
  };
  for (std::size_t j = c - 2; j < c + 2; ++j) pv += 0.5 * h * (d(j) + d(j + 1));

  const double u = std::sqrt(grid.back());
  const double k = std::sqrt(e_check);
  const double coeff = xi.back() * u;
  const double tail = coeff / k * std::log((u + k) / (u - k));
  if (pv_out) *pv_out = pv;
  if (tail_out) *tail_out = tail;
  return pv + tail;
}

/// |LHS - RHS| / max(|LHS|, 0.01) for gamma(E) = -int log|E - E'| dxi(E') at
/// E_check > 0. Couplings must be nonnegative so that xi lives on E' > 0.
inline ThoulessResult thouless_residual(const CouplingDistribution& kappa, const Scatterer& scat, double e_check,
                                        const ThoulessParams& p = {}) {
  require_positive_energy(e_check, "thouless_residual");
  if (kappa.support().first < 0.0)
    throw std::invalid_argument("thouless_residual: couplings must be nonnegative (spectrum in [0, inf))");
  if (e_check - 2.0 * p.grid.h <= 0.0 || e_check + 2.0 * p.grid.h > p.grid.linear_max)
    throw std::invalid_argument("thouless_residual: e_check too close to the grid edge (PV window truncated)");
  const auto grid = thouless_energy_grid(e_check, p.grid);
  const auto est = xi_mc(kappa, scat, grid, p.n_xi, p.realizations, p.seed, p.threads);
  std::vector<double> xi(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) xi[i] = est[i].xi.mean;

  ThoulessResult r;
  r.e_check = e_check;
  r.grid_points = grid.size();
  r.rhs = thouless_rhs(grid, xi, e_check, &r.pv, &r.tail);
  r.lhs = lyapunov_mc(kappa, scat, e_check, p.n_gamma, p.realizations, p.seed, p.threads).mean;  // gamma_0 = 0 for E > 0
  r.residual = std::abs(r.lhs - r.rhs) / std::max(std::abs(r.lhs), 0.01);
  return r;
}

struct DecayFit {
  double slope = 0.0;
  bool vanished = false;  // y hit zero in the tail: faster than any power
  std::size_t points = 0;
};

/// Least-squares slope of log y against log E over E >= e_min_fit.
inline DecayFit decay_fit(std::span<const std::pair<double, double>> curve, double e_min_fit) {
  std::vector<std::pair<double, double>> tail;
  for (const auto& [E, y] : curve)
    if (E >= e_min_fit) tail.emplace_back(E, y);
  if (tail.size() < 8) throw std::invalid_argument("decay_fit: need at least 8 points above e_min_fit");
  DecayFit fit;
  fit.points = tail.size();
  for (const auto& [E, y] : tail) {
    if (!(E > 0.0)) throw std::invalid_argument("decay_fit: energies must be positive");
    if (!(y > 0.0)) {
      fit.vanished = true;
      fit.slope = -std::numeric_limits<double>::infinity();
      return fit;
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [E, y] : tail) {
    const double x = std::log(E), v = std::log(y);
    sx += x;
    sy += v;
    sxx += x * x;
    sxy += x * v;
  }
  const double m = static_cast<double>(tail.size());
  fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return fit;
}

struct DeltaConvergence {
  std::vector<double> eps;
  std::vector<double> errors;  // |T_eps - T_delta| + |R_eps - R_delta|
  bool monotone = true;
  double order = std::numeric_limits<double>::quiet_NaN();  // from the last two points
};

/// Grid approximants (1/eps) 1[-eps/2, eps/2] against the point interaction.
inline DeltaConvergence delta_convergence(double alpha, double E, std::span<const double> eps_sequence,
                                          int steps = kDefaultSteps) {
  require_positive_energy(E, "delta_convergence");
  for (std::size_t i = 1; i < eps_sequence.size(); ++i)
    if (!(eps_sequence[i] < eps_sequence[i - 1]))
      throw std::invalid_argument("delta_convergence: eps must be decreasing");
  const auto ref = kp_scattering(alpha, E);
  DeltaConvergence out;
  for (double eps : eps_sequence) {
    const auto s = Scatterer(shapes::delta_approximant(eps), steps)(alpha, E);
    out.eps.push_back(eps);
    out.errors.push_back(std::abs(s.T - ref.T) + std::abs(s.R - ref.R));
  }
  for (std::size_t i = 1; i < out.errors.size(); ++i)
    if (out.errors[i] > out.errors[i - 1]) out.monotone = false;
  const std::size_t m = out.errors.size();
  if (m >= 2 && out.errors[m - 1] > 0.0 && out.errors[m - 2] > 0.0)
    out.order = std::log(out.errors[m - 2] / out.errors[m - 1]) / std::log(out.eps[m - 2] / out.eps[m - 1]);
  return out;
}

/// sup over the tail grid of sqrt(E) |E{xi_alpha(E)}| / (E{|alpha|^(1/2)}^2 int|f|).
inline double proposition3_scaling(const Scatterer& scat, const CouplingDistribution& kappa,
                                   std::span<const double> tail_grid) {
  const double root = expect(kappa, [](double a) { return std::sqrt(std::abs(a)); });
  const double norm = root * root * scat.abs_integral();
  if (norm == 0.0) return 0.0;
  const auto xi = mean_single_site_xi(kappa, scat, tail_grid);
  double sup = 0.0;
  for (std::size_t i = 0; i < tail_grid.size(); ++i)
    sup = std::max(sup, std::sqrt(tail_grid[i]) * std::abs(xi[i]) / norm);
  return sup;
}

}  // namespace rsbound
