#pragma once

// alpha -> ScatteringData at E for a given single-site shape, and the
// single-site scattering phase / spectral shift.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "rsbound/kronig_penney.hpp"
#include "rsbound/phase.hpp"
#include "rsbound/potential.hpp"
#include "rsbound/scattering.hpp"

namespace rsbound {

/// Scattering data of alpha*f. Grid shapes are integrated, the formal delta
/// uses the closed form.
class Scatterer {
 public:
  explicit Scatterer(SingleSitePotential p, int steps = kDefaultSteps) : p_(std::move(p)), steps_(steps) {
    if (steps_ < kMinSteps) throw std::invalid_argument("Scatterer: steps must be >= 16");
  }

  ScatteringData operator()(double alpha, double E) const {
    if (is_delta(p_)) return kp_scattering(alpha, E);
    if (alpha == 0.0) {
      require_positive_energy(E, "Scatterer");
      return {E, 1.0, 0.0, 0.0};
    }
    return scattering_from_fundamental(fundamental_matrix(p_, alpha, E, steps_), E);
  }

  const SingleSitePotential& potential() const { return p_; }
  int steps() const { return steps_; }
  double abs_integral() const { return rsbound::abs_integral(p_); }

 private:
  SingleSitePotential p_;
  int steps_;
};

struct PhaseShiftPoint {
  double energy;
  double delta;  // scattering phase (1/2i) log det S = arg T on the continuous branch
  double xi;     // -delta / pi
};

/// Scattering phase and spectral shift of alpha*f on an ascending grid. The
/// branch is fixed at the top energy (principal value, delta -> 0 as E grows)
/// and continued downward.
inline std::vector<PhaseShiftPoint> single_site_phase_shift(const Scatterer& scatterer, double alpha,
                                                            std::span<const double> grid) {
  auto raw = [&](double E) { return std::arg(scatterer(alpha, E).T); };
  const auto delta = unwrap_phase(grid, raw);
  std::vector<PhaseShiftPoint> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = {grid[i], delta[i], -delta[i] / std::numbers::pi};
  return out;
}

inline std::vector<PhaseShiftPoint> single_site_phase_shift(const SingleSitePotential& p, double alpha,
                                                            std::span<const double> grid,
                                                            int steps = kDefaultSteps) {
  return single_site_phase_shift(Scatterer(p, steps), alpha, grid);
}

/// Anchor energy for phase continuation: large enough that the Born phase
/// |alpha| int|f| / (2 sqrt E) is below 0.1.
inline double anchor_energy(double alpha, double abs_integral_f, double floor = 1e6) {
  const double s = std::abs(alpha) * abs_integral_f;
  return std::max(floor, 25.0 * s * s);
}

/// Log grid from the requested energies up to the anchor, with at least
/// `per_decade` points per decade; contains every requested energy.
inline std::vector<double> continuation_grid(std::span<const double> energies, double e_max,
                                             int per_decade = 8) {
  std::vector<double> g(energies.begin(), energies.end());
  std::sort(g.begin(), g.end());
  const double lo = g.front();
  if (e_max > g.back()) g.push_back(e_max);
  const auto n = static_cast<std::size_t>(std::ceil(std::log10(g.back() / lo) * per_decade)) + 2;
  if (g.back() > lo) {
    const auto extra = log_energy_grid(lo, g.back(), std::max<std::size_t>(n, 2));
    g.insert(g.end(), extra.begin(), extra.end());
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end(), [](double a, double b) { return std::abs(a - b) <= 1e-14 * b; }),
          g.end());
  return g;
}

/// xi_alpha at each requested energy (any order), via continuation from the anchor.
inline std::vector<double> single_site_xi(const Scatterer& scatterer, double alpha,
                                          std::span<const double> energies, double e_max = 0.0) {
  if (energies.empty()) return {};
  if (alpha == 0.0) return std::vector<double>(energies.size(), 0.0);
  if (is_delta(scatterer.potential())) {
    std::vector<double> out;
    for (double E : energies) out.push_back(kp_xi(alpha, E));
    return out;
  }
  if (e_max <= 0.0) e_max = anchor_energy(alpha, scatterer.abs_integral());
  const auto grid = continuation_grid(energies, e_max);
  const auto pts = single_site_phase_shift(scatterer, alpha, grid);
  std::vector<double> out;
  out.reserve(energies.size());
  for (double E : energies) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), E * (1.0 - 1e-14));
    out.push_back(pts[static_cast<std::size_t>(it - grid.begin())].xi);
  }
  return out;
}

}  // namespace rsbound
