#pragma once

// Expectations over the coupling distribution: A(E) = E{L^dagger L} for the
// per-site chain factor L, its eigenvalues beta_-+, the Lyapunov bound
// gamma_tilde = log(beta_+)/2, the A_j recursion, and the ingredients of the
// spectral shift / IDS envelope (E{xi_alpha}, r(E)).

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "rsbound/coupling.hpp"
#include "rsbound/errors.hpp"
#include "rsbound/matrix2.hpp"
#include "rsbound/scatterer.hpp"
#include "rsbound/scattering.hpp"

namespace rsbound {

inline constexpr double kTwoRouteTol = 1e-10;
inline constexpr double kBetaMinusFloor = -1e-10;

struct EnsembleMatrices {
  double energy = 0.0;
  ComplexMatrix2 A;
  double a = 1.0;
  Complex b{0.0};
  double beta_plus = 1.0;
  double beta_minus = 1.0;
  double gamma_tilde = 0.0;
};

/// Scattering data at the quadrature nodes of kappa, at one energy.
struct NodeData {
  double alpha;
  double weight;
  ScatteringData s;
};

template <class Scat>
std::vector<NodeData> node_data(const CouplingDistribution& kappa, const Scat& scat, double E) {
  require_positive_energy(E, "node_data");
  std::vector<NodeData> out;
  out.reserve(kappa.nodes().size());
  for (const auto& n : kappa.nodes()) {
    ScatteringData s = scat(n.alpha, E);
    if (std::abs(s.T) == 0.0) throw std::domain_error("ensemble: T = 0 at a quadrature node");
    out.push_back({n.alpha, n.weight, s});
  }
  return out;
}

/// a = E{2/|T|^2 - 1}, b = -2 e^{i sqrt E} E{R/|T|^2}, A = (a b; conj b a).
/// The closed form is cross-checked against E{L^dagger L} entrywise.
inline EnsembleMatrices ensemble_matrices(std::span<const NodeData> nodes, double E) {
  require_positive_energy(E, "ensemble_matrices");
  double a = 0.0;
  Complex mean_r{0.0};
  ComplexMatrix2 direct = ComplexMatrix2::zero();
  for (const auto& n : nodes) {
    const double t2 = std::norm(n.s.T);
    a += n.weight * (2.0 / t2 - 1.0);
    mean_r += n.weight * n.s.R / t2;
    const ComplexMatrix2 l = site_factor(n.s);
    direct += Complex{n.weight} * (l.adjoint() * l);
  }
  const Complex b = -2.0 * std::polar(1.0, std::sqrt(E)) * mean_r;
  EnsembleMatrices m;
  m.energy = E;
  m.a = a;
  m.b = b;
  m.A = {a, b, std::conj(b), a};
  if (max_abs_diff(m.A, direct) > kTwoRouteTol * std::max(1.0, a))
    throw ConsistencyError("ensemble_matrices: closed form and E{L^dagger L} disagree");
  m.beta_plus = a + std::abs(b);
  m.beta_minus = a - std::abs(b);
  if (m.beta_minus < kBetaMinusFloor * std::max(1.0, a))
    throw ConsistencyError("ensemble_matrices: negative beta_minus, A(E) not positive");
  m.gamma_tilde = 0.5 * std::log(m.beta_plus);
  return m;
}

template <class Scat>
EnsembleMatrices ensemble_matrices(const CouplingDistribution& kappa, const Scat& scat, double E) {
  const auto nodes = node_data(kappa, scat, E);
  return ensemble_matrices(nodes, E);
}

/// E{lambda_tilde^dagger lambda_tilde} with the displayed lambda_tilde. Same
/// eigenvalues as ensemble_matrices().A.
template <class Scat>
ComplexMatrix2 expected_lambda_tilde_gram(const CouplingDistribution& kappa, const Scat& scat, double E) {
  return expect(kappa, [&](double alpha) {
    const ComplexMatrix2 l = lambda_tilde(scat(alpha, E));
    return l.adjoint() * l;
  });
}

/// A_0 = I, A_j = E{L^dagger A_{j-1} L}.
inline ComplexMatrix2 a_recursion(std::span<const NodeData> nodes, int j) {
  if (j < 0) throw std::invalid_argument("a_recursion: j must be nonnegative");
  std::vector<ComplexMatrix2> factors;
  factors.reserve(nodes.size());
  for (const auto& n : nodes) factors.push_back(site_factor(n.s));
  ComplexMatrix2 a = ComplexMatrix2::identity();
  for (int step = 0; step < j; ++step) {
    ComplexMatrix2 next = ComplexMatrix2::zero();
    for (std::size_t i = 0; i < nodes.size(); ++i)
      next += Complex{nodes[i].weight} * (factors[i].adjoint() * a * factors[i]);
    a = next;
  }
  return a;
}

template <class Scat>
ComplexMatrix2 a_recursion(const CouplingDistribution& kappa, const Scat& scat, double E, int j) {
  const auto nodes = node_data(kappa, scat, E);
  return a_recursion(nodes, j);
}

/// E{xi_alpha(E)} for a callable alpha -> xi_alpha(E).
template <class Xi>
double mean_single_site_xi(const CouplingDistribution& kappa, Xi&& xi) {
  return expect(kappa, std::forward<Xi>(xi));
}

/// E{xi_alpha(E)} at each energy, via single-site phase continuation per node.
inline std::vector<double> mean_single_site_xi(const CouplingDistribution& kappa, const Scatterer& scat,
                                               std::span<const double> energies) {
  std::vector<double> out(energies.size(), 0.0);
  for (const auto& n : kappa.nodes()) {
    const auto xi = single_site_xi(scat, n.alpha, energies);
    for (std::size_t i = 0; i < energies.size(); ++i) out[i] += n.weight * xi[i];
  }
  return out;
}

inline double mean_single_site_xi(const CouplingDistribution& kappa, const Scatterer& scat, double E) {
  return mean_single_site_xi(kappa, scat, std::span<const double>(&E, 1)).front();
}

/// Envelope half-width r(E) = min(1/2, E{|R|/(1-|R|)}/pi), and the sharper
/// pointwise form E{min(1/2, |R|/(pi(1-|R|)))}.
struct ReflectionEnvelope {
  double mean_ratio = 0.0;  // E{|R|/(1-|R|)}, +inf if |R| = 1 on a node
  double r = 0.0;
  double r_pointwise = 0.0;
};

/// min(1/2, |R|/(pi (1-|R|))) for one reflection modulus.
inline double reflection_term(double abs_r) {
  if (abs_r >= 1.0) return 0.5;
  return std::min(0.5, abs_r / (std::numbers::pi * (1.0 - abs_r)));
}

inline ReflectionEnvelope r_of_E(std::span<const NodeData> nodes) {
  ReflectionEnvelope env;
  bool infinite = false;
  for (const auto& n : nodes) {
    const double ar = std::abs(n.s.R);
    if (ar >= 1.0) {
      if (n.weight > 0.0) infinite = true;
    } else {
      env.mean_ratio += n.weight * ar / (1.0 - ar);
    }
    env.r_pointwise += n.weight * reflection_term(ar);
  }
  if (infinite) env.mean_ratio = std::numeric_limits<double>::infinity();
  env.r = std::min(0.5, env.mean_ratio / std::numbers::pi);
  return env;
}

template <class Scat>
ReflectionEnvelope r_of_E(const CouplingDistribution& kappa, const Scat& scat, double E) {
  const auto nodes = node_data(kappa, scat, E);
  return r_of_E(nodes);
}

/// sqrt(E)/pi - E{xi_alpha} -+ r, plus the cruder -+ 1 envelope valid for all E.
struct IdsEnvelope {
  double energy = 0.0;
  double n_free = 0.0;
  double xi_mean = 0.0;
  double r = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double crude_lower = 0.0;
  double crude_upper = 0.0;
};

inline IdsEnvelope ids_envelope(double E, double xi_mean, double r) {
  require_positive_energy(E, "ids_envelope");
  const double n_free = std::sqrt(E) / std::numbers::pi;
  const double centre = n_free - xi_mean;
  return {E, n_free, xi_mean, r, centre - r, centre + r, centre - 1.0, centre + 1.0};
}

inline IdsEnvelope ids_envelope(const CouplingDistribution& kappa, const Scatterer& scat, double E) {
  return ids_envelope(E, mean_single_site_xi(kappa, scat, E), r_of_E(kappa, scat, E).r);
}

}  // namespace rsbound
