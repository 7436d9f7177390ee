#pragma once

// Energy grids and continuous phase continuation in E.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "rsbound/errors.hpp"

namespace rsbound {

inline constexpr int kMaxRefinementDepth = 20;

inline std::vector<double> log_energy_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi > lo) || count < 2) throw std::invalid_argument("log_energy_grid: need 0 < lo < hi, count >= 2");
  std::vector<double> g(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
  g.back() = hi;
  return g;
}

inline std::vector<double> linear_energy_grid(double lo, double hi, std::size_t count) {
  if (!(hi > lo) || count < 2) throw std::invalid_argument("linear_energy_grid: need lo < hi, count >= 2");
  std::vector<double> g(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) g[i] = lo + step * static_cast<double>(i);
  g.back() = hi;
  return g;
}

inline void require_ascending_positive(std::span<const double> grid, const char* op) {
  if (grid.empty()) throw std::invalid_argument(std::string(op) + ": empty energy grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw std::invalid_argument(std::string(op) + ": energies must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument(std::string(op) + ": energy grid must be ascending");
  }
}

/// Wraps an angle to (-pi, pi].
inline double wrap_to_pi(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  x = std::remainder(x, two_pi);
  if (x <= -std::numbers::pi) x += two_pi;
  return x;
}

/// Continues a phase known modulo 2 pi along an ascending energy grid, starting
/// from the principal value at the top energy and walking down. Whenever two
/// adjacent energies differ by more than `max_jump` the interval is bisected
/// (geometric midpoint), up to `max_depth` levels; beyond that UnwrapError.
template <class RawPhase>
std::vector<double> unwrap_phase(std::span<const double> grid, RawPhase&& raw,
                                 int max_depth = kMaxRefinementDepth,
                                 double max_jump = 0.5 * std::numbers::pi) {
  require_ascending_positive(grid, "unwrap_phase");
  std::vector<double> out(grid.size());
  auto step = [&](auto& self, double e_known, double phase_known, double e_target, double raw_target,
                  int depth) -> double {
    const double d = wrap_to_pi(raw_target - phase_known);
    if (std::abs(d) <= max_jump) return phase_known + d;
    if (depth >= max_depth)
      throw UnwrapError("phase unwrap failed: jump persists after maximum refinement near E = " +
                        std::to_string(e_target));
    const double e_mid = std::sqrt(e_known * e_target);
    const double mid = self(self, e_known, phase_known, e_mid, raw(e_mid), depth + 1);
    return self(self, e_mid, mid, e_target, raw_target, depth + 1);
  };
  const std::size_t last = grid.size() - 1;
  out[last] = wrap_to_pi(raw(grid[last]));
  for (std::size_t i = last; i-- > 0;) out[i] = step(step, grid[i + 1], out[i + 1], grid[i], raw(grid[i]), 0);
  return out;
}

}  // namespace rsbound
