#pragma once

// Closed forms for the point interaction alpha*delta(x): scattering data,
// single-site spectral shift, ensemble matrix entries and the reflection
// envelope. Used as oracles for the grid-potential machinery.

#include <cmath>
#include <complex>
#include <numbers>

#include "rsbound/coupling.hpp"
#include "rsbound/scattering.hpp"

namespace rsbound {

/// T = (1 + i alpha/(2k))^{-1}, R = L = -i alpha/(2k) T.
inline ScatteringData kp_scattering(double alpha, double E) {
  require_positive_energy(E, "kp_scattering");
  const double beta = alpha / (2.0 * std::sqrt(E));
  const Complex T = 1.0 / Complex{1.0, beta};
  const Complex R = Complex{0.0, -beta} * T;
  return {E, T, R, R};
}

/// (1/pi) arctan(alpha / (2 sqrt(E))).
inline double kp_xi(double alpha, double E) {
  require_positive_energy(E, "kp_xi");
  return std::atan(alpha / (2.0 * std::sqrt(E))) / std::numbers::pi;
}

struct KpMoments {
  double mean = 0.0;      // <alpha>
  double mean_sq = 0.0;   // <alpha^2>
  double mean_abs = 0.0;  // <|alpha|>
};

inline KpMoments kp_moments(const CouplingDistribution& kappa) {
  return {expect(kappa, [](double a) { return a; }), expect(kappa, [](double a) { return a * a; }),
          expect(kappa, [](double a) { return std::abs(a); })};
}

/// Entries of A(E) = (a b; conj b a) and its eigenvalues.
struct EnsembleAB {
  double a = 1.0;
  Complex b{0.0};
  double beta_plus() const { return a + std::abs(b); }
  double beta_minus() const { return a - std::abs(b); }
  double gamma_tilde() const { return 0.5 * std::log(beta_plus()); }
};

/// A(E) = E{site_factor^dagger site_factor} for the delta potential:
/// a = 1 + <alpha^2>/(2E), b = e^{i sqrt E} (i <alpha>/sqrt(E) + <alpha^2>/(2E)).
inline EnsembleAB kp_ensemble_ab(const CouplingDistribution& kappa, double E) {
  require_positive_energy(E, "kp_ensemble_ab");
  const auto m = kp_moments(kappa);
  const double k = std::sqrt(E);
  return {1.0 + m.mean_sq / (2.0 * E), std::polar(1.0, k) * Complex{m.mean_sq / (2.0 * E), m.mean / k}};
}

/// The displayed general formula b = -e^{i sqrt E} E{R/T^2} evaluated with
/// delta data, a as above. Kept for comparison only: it does not satisfy
/// det A = 1 for a point mass.
inline EnsembleAB kp_ensemble_ab_printed_general(const CouplingDistribution& kappa, double E) {
  require_positive_energy(E, "kp_ensemble_ab_printed_general");
  const auto m = kp_moments(kappa);
  const double k = std::sqrt(E);
  // R/T^2 = -i beta (1 + i beta) = beta^2 - i beta with beta = alpha/(2k)
  const Complex mean_r_over_t2{m.mean_sq / (4.0 * E), -m.mean / (2.0 * k)};
  return {1.0 + m.mean_sq / (2.0 * E), -std::polar(1.0, k) * mean_r_over_t2};
}

/// The displayed delta-model closed forms, as printed:
/// a = 1 + <alpha^2>/(4E), b = i<alpha>/(2 sqrt E) - <alpha^2>/(4E).
inline EnsembleAB kp_ensemble_ab_printed(const CouplingDistribution& kappa, double E) {
  require_positive_energy(E, "kp_ensemble_ab_printed");
  const auto m = kp_moments(kappa);
  return {1.0 + m.mean_sq / (4.0 * E), Complex{-m.mean_sq / (4.0 * E), m.mean / (2.0 * std::sqrt(E))}};
}

/// The displayed closed form for beta_+ as printed:
/// 1 + <alpha^2>/(4E) + (1/(2 sqrt E)) (<alpha^2>/(4E) + <alpha>^2)^{1/2}.
inline double kp_beta_plus_printed(const CouplingDistribution& kappa, double E) {
  require_positive_energy(E, "kp_beta_plus_printed");
  const auto m = kp_moments(kappa);
  return 1.0 + m.mean_sq / (4.0 * E) +
         std::sqrt(m.mean_sq / (4.0 * E) + m.mean * m.mean) / (2.0 * std::sqrt(E));
}

struct Envelope {
  double lower = 0.0;
  double upper = 0.0;
};

/// <|alpha|>/(2 sqrt E) + <alpha^2>/(4E) <= E{|R|/(1-|R|)} <= <|alpha|>/(2 sqrt E) + <alpha^2>/(2E).
inline Envelope kp_r_envelope(const CouplingDistribution& kappa, double E) {
  require_positive_energy(E, "kp_r_envelope");
  const auto m = kp_moments(kappa);
  const double first = m.mean_abs / (2.0 * std::sqrt(E));
  return {first + m.mean_sq / (4.0 * E), first + m.mean_sq / (2.0 * E)};
}

}  // namespace rsbound
