#pragma once

// Single-site potential shapes f with support in [-1/2, 1/2] and the random
// potential V = sum_j alpha_j f(. - j) built from them.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace rsbound {

inline constexpr double kCellHalfWidth = 0.5;
/// Default number of grid cells over [-1/2, 1/2]. Aligned with the default
/// integrator step count so grid nodes are step nodes.
inline constexpr std::size_t kDefaultGridCells = 1024;

/// Uniformly sampled shape, linearly interpolated, zero outside the samples.
class GridPotential {
 public:
  GridPotential(double x0, double dx, std::vector<double> values)
      : x0_(x0), dx_(dx), values_(std::move(values)) {
    validate();
  }

  /// Builds from explicit (position, value) pairs; positions must be sorted
  /// and uniformly spaced.
  static GridPotential from_samples(std::span<const std::pair<double, double>> samples) {
    if (samples.size() < 2) throw std::invalid_argument("grid potential needs at least two samples");
    const double x0 = samples.front().first;
    const double dx = (samples.back().first - x0) / static_cast<double>(samples.size() - 1);
    std::vector<double> values;
    values.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double expected = x0 + dx * static_cast<double>(i);
      if (std::abs(samples[i].first - expected) > 1e-9 * std::max(1.0, std::abs(dx)) + 1e-12)
        throw std::invalid_argument("grid samples must be sorted and uniformly spaced");
      values.push_back(samples[i].second);
    }
    return GridPotential(x0, dx, std::move(values));
  }

  /// Samples `shape` at `cells + 1` uniform points over [a, b].
  static GridPotential sample(const std::function<double(double)>& shape, double a, double b,
                              std::size_t cells = kDefaultGridCells) {
    if (cells < 1) throw std::invalid_argument("grid needs at least one cell");
    const double dx = (b - a) / static_cast<double>(cells);
    std::vector<double> values(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) values[i] = shape(a + dx * static_cast<double>(i));
    return GridPotential(a, dx, std::move(values));
  }

  double x_begin() const { return x0_; }
  double x_end() const { return x0_ + dx_ * static_cast<double>(values_.size() - 1); }
  double dx() const { return dx_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double position(std::size_t i) const { return x0_ + dx_ * static_cast<double>(i); }

  /// f(x) by linear interpolation; zero outside [x_begin, x_end].
  double operator()(double x) const {
    if (x < x0_ || x > x_end()) return 0.0;
    const double s = (x - x0_) / dx_;
    auto i = static_cast<std::size_t>(s);
    if (i >= values_.size() - 1) return values_.back();
    const double t = s - static_cast<double>(i);
    return values_[i] + t * (values_[i + 1] - values_[i]);
  }

  /// Exact integral of |f| for the piecewise-linear interpolant.
  double abs_integral() const {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
      const double a = values_[i], b = values_[i + 1];
      if (a * b >= 0.0) {
        total += 0.5 * dx_ * (std::abs(a) + std::abs(b));
      } else {
        // sign change inside the segment: two triangles
        total += 0.5 * dx_ * (a * a + b * b) / (std::abs(a) + std::abs(b));
      }
    }
    return total;
  }

  /// True when f(-x) = f(x) on the grid (within `tol`).
  bool is_even(double tol = 1e-14) const {
    if (std::abs(x0_ + x_end()) > 1e-12) return false;
    for (std::size_t i = 0, j = values_.size() - 1; i < j; ++i, --j)
      if (std::abs(values_[i] - values_[j]) > tol) return false;
    return true;
  }

 private:
  void validate() const {
    if (values_.size() < 2) throw std::invalid_argument("grid potential needs at least two samples");
    if (!(dx_ > 0.0) || !std::isfinite(dx_)) throw std::invalid_argument("grid spacing must be positive");
    constexpr double slack = 1e-12;
    if (x0_ < -kCellHalfWidth - slack || x_end() > kCellHalfWidth + slack)
      throw std::invalid_argument("grid support must lie inside [-1/2, 1/2]");
    for (double v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("grid values must be finite");
  }

  double x0_;
  double dx_;
  std::vector<double> values_;
};

/// Point interaction at the origin (the Kronig-Penney limit). Never evaluated
/// pointwise; its scattering data is closed-form.
struct FormalDelta {};

using SingleSitePotential = std::variant<GridPotential, FormalDelta>;

inline bool is_delta(const SingleSitePotential& p) { return std::holds_alternative<FormalDelta>(p); }

inline const GridPotential& require_grid(const SingleSitePotential& p, const char* op) {
  if (const auto* g = std::get_if<GridPotential>(&p)) return *g;
  throw std::invalid_argument(std::string(op) + ": formal delta potential is not pointwise evaluable");
}

/// alpha * f(x) for x in [-1/2, 1/2].
inline double evaluate_potential(const SingleSitePotential& p, double alpha, double x) {
  const auto& g = require_grid(p, "evaluate_potential");
  if (!(x >= -kCellHalfWidth && x <= kCellHalfWidth))
    throw std::out_of_range("evaluate_potential: x outside [-1/2, 1/2]");
  return alpha * g(x);
}

/// Integral of |f|; the delta has unit mass.
inline double abs_integral(const SingleSitePotential& p) {
  if (is_delta(p)) return 1.0;
  return std::get<GridPotential>(p).abs_integral();
}

/// [sum_j (int_{cell j} |V|)^{1/2}]^2 from per-cell L1 masses.
inline double birman_solomyak_norm(std::span<const double> cell_masses) {
  double s = 0.0;
  for (double m : cell_masses) {
    if (m < 0.0) throw std::invalid_argument("cell mass must be nonnegative");
    s += std::sqrt(m);
  }
  return s * s;
}

/// Birman-Solomyak norm of alpha*f. The support fits in one cell, so this is
/// |alpha| * int |f|.
inline double birman_solomyak_norm(const SingleSitePotential& p, double alpha) {
  const auto& g = require_grid(p, "birman_solomyak_norm");
  const double mass = std::abs(alpha) * g.abs_integral();
  return birman_solomyak_norm(std::span<const double>(&mass, 1));
}

/// Couplings alpha_{-n}..alpha_{n} of one realization.
struct Realization {
  std::vector<double> couplings;

  std::size_t n() const { return couplings.empty() ? 0 : (couplings.size() - 1) / 2; }
  std::size_t sites() const { return couplings.size(); }
  /// Coupling at lattice site j in [-n, n].
  double at(long j) const { return couplings.at(static_cast<std::size_t>(j + static_cast<long>(n()))); }
};

/// Norm of the finite-volume potential sum_j alpha_j f(. - j).
inline double birman_solomyak_norm(const SingleSitePotential& p, const Realization& r) {
  const double f1 = require_grid(p, "birman_solomyak_norm").abs_integral();
  std::vector<double> masses;
  masses.reserve(r.sites());
  for (double a : r.couplings) masses.push_back(std::abs(a) * f1);
  return birman_solomyak_norm(masses);
}

namespace shapes {

/// height on [-width/2, width/2].
inline GridPotential square(double width = 0.5, double height = 1.0,
                            std::size_t cells = kDefaultGridCells) {
  if (!(width > 0.0 && width <= 1.0)) throw std::invalid_argument("square: width must be in (0, 1]");
  return GridPotential::sample([height](double) { return height; }, -0.5 * width, 0.5 * width, cells);
}

/// (1/eps) on [-eps/2, eps/2]; unit mass, tends to the delta as eps -> 0.
inline GridPotential delta_approximant(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("delta_approximant: eps must be in (0, 1]");
  return GridPotential(-0.5 * eps, eps, {1.0 / eps, 1.0 / eps});
}

/// amplitude * exp(-x^2 / (2 sigma^2)) truncated to the cell.
inline GridPotential gaussian_truncated(double sigma = 0.1, double amplitude = 1.0,
                                        std::size_t cells = kDefaultGridCells) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_truncated: sigma must be positive");
  return GridPotential::sample(
      [=](double x) { return amplitude * std::exp(-x * x / (2.0 * sigma * sigma)); }, -0.5, 0.5, cells);
}

/// amplitude * cos^2(pi x): smooth, vanishing at the cell edges.
inline GridPotential cosine_bump(double amplitude = 1.0, std::size_t cells = kDefaultGridCells) {
  return GridPotential::sample(
      [=](double x) {
        const double c = std::cos(std::numbers::pi * x);
        return amplitude * c * c;
      },
      -0.5, 0.5, cells);
}

/// Linear ramp on [-1/2, 1/2]; asymmetric, so R != L.
inline GridPotential ramp(double amplitude = 1.0, std::size_t cells = kDefaultGridCells) {
  return GridPotential::sample([=](double x) { return amplitude * (x + 0.5); }, -0.5, 0.5, cells);
}

}  // namespace shapes
}  // namespace rsbound
