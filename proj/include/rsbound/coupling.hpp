#pragma once

// Coupling distributions kappa with compact support, their quadrature rules,
// and expectations E{g(alpha)}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <type_traits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rsbound/matrix2.hpp"

namespace rsbound {

inline constexpr int kDefaultQuadratureOrder = 64;
inline constexpr double kMassTol = 1e-12;

struct QuadratureNode {
  double alpha;
  double weight;
};

/// Gauss-Legendre nodes and weights on [a, b].
inline std::vector<QuadratureNode> gauss_legendre(int order, double a = -1.0, double b = 1.0) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
  std::vector<QuadratureNode> rule(static_cast<std::size_t>(order));
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule[static_cast<std::size_t>(i)] = {mid - half * z, half * w};
    rule[static_cast<std::size_t>(order - 1 - i)] = {mid + half * z, half * w};
  }
  return rule;
}

/// Discrete atoms or a density on [alpha_min, alpha_max]. Immutable after
/// construction; the quadrature rule is built once.
class CouplingDistribution {
 public:
  using Density = std::function<double(double)>;

  static CouplingDistribution discrete(std::vector<QuadratureNode> atoms) {
    if (atoms.empty()) throw std::invalid_argument("coupling distribution: no atoms");
    double mass = 0.0;
    for (const auto& a : atoms) {
      if (!std::isfinite(a.alpha)) throw std::invalid_argument("coupling distribution: non-finite atom");
      if (!(a.weight >= 0.0)) throw std::invalid_argument("coupling distribution: negative weight");
      mass += a.weight;
    }
    if (std::abs(mass - 1.0) > kMassTol)
      throw std::invalid_argument("coupling distribution: weights do not sum to 1");
    CouplingDistribution d;
    d.rule_ = std::move(atoms);
    d.discrete_ = true;
    d.build_cdf_discrete();
    return d;
  }

  static CouplingDistribution point_mass(double alpha) { return discrete({{alpha, 1.0}}); }

  /// Two atoms +-a with equal weight.
  static CouplingDistribution symmetric_bernoulli(double a) {
    return discrete({{-a, 0.5}, {a, 0.5}});
  }

  static CouplingDistribution density(double alpha_min, double alpha_max, Density rho,
                                      int quadrature_order = kDefaultQuadratureOrder) {
    if (!(alpha_min < alpha_max) || !std::isfinite(alpha_min) || !std::isfinite(alpha_max))
      throw std::invalid_argument("coupling distribution: support must be a finite interval");
    if (quadrature_order < 1) throw std::invalid_argument("coupling distribution: quadrature order must be positive");
    CouplingDistribution d;
    d.discrete_ = false;
    d.support_ = {alpha_min, alpha_max};
    d.order_ = quadrature_order;
    double mass = 0.0;
    for (auto node : gauss_legendre(quadrature_order, alpha_min, alpha_max)) {
      const double r = rho(node.alpha);
      if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("coupling distribution: density must be nonnegative");
      node.weight *= r;
      mass += node.weight;
      d.rule_.push_back(node);
    }
    if (std::abs(mass - 1.0) > kMassTol)
      throw std::invalid_argument("coupling distribution: density does not integrate to 1");
    d.density_ = std::move(rho);
    d.build_cdf_density();
    return d;
  }

  static CouplingDistribution uniform(double a, double b, int quadrature_order = kDefaultQuadratureOrder) {
    const double h = 1.0 / (b - a);
    return density(a, b, [h](double) { return h; }, quadrature_order);
  }

  bool is_discrete() const { return discrete_; }
  int quadrature_order() const { return order_; }
  std::pair<double, double> support() const {
    if (!discrete_) return support_;
    auto [lo, hi] = std::minmax_element(rule_.begin(), rule_.end(),
                                        [](auto& x, auto& y) { return x.alpha < y.alpha; });
    return {lo->alpha, hi->alpha};
  }
  /// Atoms (discrete) or density-weighted Gauss-Legendre nodes.
  const std::vector<QuadratureNode>& nodes() const { return rule_; }

  /// Same density at a different quadrature order.
  CouplingDistribution with_order(int order) const {
    if (discrete_) return *this;
    return density(support_.first, support_.second, density_, order);
  }

  /// Inverse-CDF draw from u in [0, 1).
  double quantile(double u) const {
    if (discrete_) {
      const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
      const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), rule_.size() - 1);
      return rule_[i].alpha;
    }
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    auto i = static_cast<std::size_t>(it - cdf_.begin());
    if (i == 0) return support_.first;
    if (i >= cdf_.size()) return support_.second;
    const double c0 = cdf_[i - 1], c1 = cdf_[i];
    const double h = (support_.second - support_.first) / static_cast<double>(cdf_.size() - 1);
    const double t = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
    return support_.first + h * (static_cast<double>(i - 1) + t);
  }

 private:
  CouplingDistribution() = default;

  void build_cdf_discrete() {
    cdf_.clear();
    double c = 0.0;
    for (const auto& a : rule_) cdf_.push_back(c += a.weight);
    cdf_.back() = 1.0;
  }

  void build_cdf_density() {
    constexpr std::size_t cells = 4096;
    const double h = (support_.second - support_.first) / cells;
    cdf_.assign(cells + 1, 0.0);
    double prev = density_(support_.first);
    for (std::size_t i = 1; i <= cells; ++i) {
      const double cur = density_(support_.first + h * static_cast<double>(i));
      cdf_[i] = cdf_[i - 1] + 0.5 * h * (prev + cur);
      prev = cur;
    }
    const double total = cdf_.back();
    if (!(total > 0.0)) throw std::invalid_argument("coupling distribution: density is not normalizable");
    for (double& c : cdf_) c /= total;
  }

  bool discrete_ = true;
  int order_ = 0;
  std::pair<double, double> support_{0.0, 0.0};
  std::vector<QuadratureNode> rule_;
  std::vector<double> cdf_;
  Density density_;
};

namespace detail {
template <class V>
V scale(double w, const V& v) {
  if constexpr (std::is_same_v<V, ComplexMatrix2>) {
    return Complex{w} * v;
  } else {
    return w * v;
  }
}
}  // namespace detail

/// E{g(alpha)} over kappa. g may return double, Complex or ComplexMatrix2.
template <class G>
auto expect(const CouplingDistribution& kappa, G&& g) {
  using V = std::decay_t<decltype(g(0.0))>;
  V acc{};
  if constexpr (std::is_same_v<V, ComplexMatrix2>) acc = ComplexMatrix2::zero();
  for (const auto& node : kappa.nodes()) acc += detail::scale(node.weight, g(node.alpha));
  return acc;
}

}  // namespace rsbound
