#pragma once

// Single-site scattering at E > 0: the cell fundamental matrix, the S-matrix
// entries (T, R, L) from plane-wave matching, and the Lambda-family matrices.
//
// Conventions: plane waves e^{+-ikx}, k = sqrt(E), amplitudes referenced to the
// site centre. T is the transmission amplitude, L the reflection amplitude for
// a wave incident from the left, R for a wave incident from the right, so that
// S = (T R; L T) and Lambda maps right-side amplitudes (e^{ikx}, e^{-ikx}) to
// left-side amplitudes.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rsbound/errors.hpp"
#include "rsbound/matrix2.hpp"
#include "rsbound/potential.hpp"

namespace rsbound {

inline constexpr int kDefaultSteps = 1024;
inline constexpr int kMinSteps = 16;
/// Tolerance for algebraic invariants (unitarity, unimodularity).
inline constexpr double kInvariantTol = 1e-9;

struct ScatteringData {
  double energy = 1.0;
  Complex T{1.0};
  Complex R{0.0};
  Complex L{0.0};

  double k() const { return std::sqrt(energy); }

  /// Largest violation among |T|^2+|R|^2=1, |R|=|L| and T conj(R) + L conj(T) = 0.
  double unitarity_defect() const {
    const double d1 = std::abs(std::norm(T) + std::norm(R) - 1.0);
    const double d2 = std::abs(std::abs(R) - std::abs(L));
    const double d3 = std::abs(T * std::conj(R) + L * std::conj(T));
    return std::max({d1, d2, d3});
  }

  /// det S = T^2 - R L.
  Complex det_s() const { return T * T - R * L; }
};

inline void require_positive_energy(double E, const char* op) {
  if (!(E > 0.0) || !std::isfinite(E)) throw std::domain_error(std::string(op) + ": energy must be positive");
}

/// Free evolution of (psi, psi') over a length d at wave number k.
inline RealMatrix2 free_propagator(double k, double d) {
  const double c = std::cos(k * d), s = std::sin(k * d);
  return {c, s / k, -k * s, c};
}

namespace detail {

/// exp of the traceless matrix (p, q; r, -p).
inline RealMatrix2 exp_traceless(double p, double q, double r) {
  const double d = p * p + q * r;
  double c, s;
  if (std::abs(d) < 1e-8) {
    c = 1.0 + d / 2.0 + d * d / 24.0;
    s = 1.0 + d / 6.0 + d * d / 120.0;
  } else if (d < 0.0) {
    const double w = std::sqrt(-d);
    c = std::cos(w);
    s = std::sin(w) / w;
  } else {
    const double w = std::sqrt(d);
    c = std::cosh(w);
    s = std::sinh(w) / w;
  }
  return {c + s * p, s * q, s * r, c - s * p};
}

/// One fourth-order Magnus step of Y' = (0 1; V-E 0) Y over [x, x+h].
template <class Field>
RealMatrix2 magnus4_step(const Field& v, double E, double x, double h) {
  constexpr double off = 0.28867513459481288225;  // sqrt(3)/6
  const double q1 = v(x + h * (0.5 - off)) - E;
  const double q2 = v(x + h * (0.5 + off)) - E;
  const double p = (std::numbers::sqrt3 / 12.0) * h * h * (q1 - q2);
  return exp_traceless(p, h, 0.5 * h * (q1 + q2));
}

}  // namespace detail

/// Maps (psi, psi') at x0 to (psi, psi') at x1 for -psi'' + v psi = E psi, with
/// `steps` equal Magnus steps on [x0, x1].
template <class Field>
RealMatrix2 propagate(const Field& v, double E, double x0, double x1, int steps) {
  RealMatrix2 m;
  const double h = (x1 - x0) / steps;
  for (int i = 0; i < steps; ++i) m = detail::magnus4_step(v, E, x0 + h * i, h) * m;
  return m;
}

/// Cell fundamental matrix from x = -1/2 to x = +1/2. Regions outside the
/// sampled support use the exact free propagator; the support is covered by
/// ceil(width * steps) equal steps so its edges are step nodes.
inline RealMatrix2 fundamental_matrix(const SingleSitePotential& p, double alpha, double E,
                                      int steps = kDefaultSteps) {
  require_positive_energy(E, "fundamental_matrix");
  const auto& g = require_grid(p, "fundamental_matrix");
  if (steps < kMinSteps) throw std::invalid_argument("fundamental_matrix: steps must be >= 16");
  const double k = std::sqrt(E);
  const double a = g.x_begin(), b = g.x_end();
  const int inner = std::max(1, static_cast<int>(std::ceil((b - a) * steps - 1e-9)));
  auto field = [&](double x) { return alpha * g(x); };
  RealMatrix2 m = free_propagator(k, a + kCellHalfWidth);
  m = propagate(field, E, a, b, inner) * m;
  return free_propagator(k, kCellHalfWidth - b) * m;
}

namespace detail {

/// Solves (a b; c d)(u, v) = (e, f).
inline std::pair<Complex, Complex> solve2(Complex a, Complex b, Complex c, Complex d, Complex e,
                                          Complex f) {
  const Complex det = a * d - b * c;
  if (std::abs(det) == 0.0) throw std::domain_error("singular matching system");
  return {(e * d - b * f) / det, (a * f - e * c) / det};
}

}  // namespace detail

/// (T, R, L) from a cell fundamental matrix by matching plane waves at x = -+1/2.
inline ScatteringData scattering_from_fundamental(const RealMatrix2& m, double E,
                                                  double tol = kInvariantTol) {
  require_positive_energy(E, "scattering_from_fundamental");
  if (std::abs(m.det() - 1.0) > tol)
    throw ConsistencyError("scattering_from_fundamental: fundamental matrix is not unimodular");
  const double k = std::sqrt(E);
  const Complex ik{0.0, k};
  const Complex em = std::exp(Complex{0.0, -0.5 * k});  // e^{-ik/2}
  const Complex ep = std::exp(Complex{0.0, 0.5 * k});   // e^{+ik/2}

  auto apply = [&](Complex psi, Complex dpsi) {
    return std::pair{m.m11 * psi + m.m12 * dpsi, m.m21 * psi + m.m22 * dpsi};
  };
  // e^{-ikx} at x = -1/2, pushed through the cell
  const auto [mr1, mr2] = apply(ep, -ik * ep);
  // e^{ikx} at x = -1/2, pushed through the cell
  const auto [mi1, mi2] = apply(em, ik * em);
  // e^{ikx} and e^{-ikx} at x = +1/2
  const Complex w1 = ep, w2 = ik * ep;
  const Complex z1 = em, z2 = -ik * em;

  if (std::abs(mr1 * (-w2) - (-w1) * mr2) < 1e-300)
    throw std::domain_error("scattering_from_fundamental: singular matching system (T = 0)");

  // left incidence: M(e^{ikx} + L e^{-ikx}) = T e^{ikx}
  const auto [L, T_left] = detail::solve2(mr1, -w1, mr2, -w2, -mi1, -mi2);
  // right incidence: M(T e^{-ikx}) = e^{-ikx} + R e^{ikx}
  const auto [T_right, R] = detail::solve2(mr1, -w1, mr2, -w2, z1, z2);

  if (std::abs(T_left - T_right) > tol)
    throw ConsistencyError("scattering_from_fundamental: left and right solves disagree on T");
  ScatteringData s{E, T_left, R, L};
  if (s.unitarity_defect() > tol)
    throw ConsistencyError("scattering_from_fundamental: S-matrix not unitary within tolerance");
  return s;
}

/// U_E^p = diag(e^{i p sqrt(E)}, e^{-i p sqrt(E)}).
inline ComplexMatrix2 phase_matrix(double E, double p) {
  const double k = std::sqrt(E);
  return ComplexMatrix2::diagonal(std::polar(1.0, p * k), std::polar(1.0, -p * k));
}

inline void require_nonzero_transmission(const ScatteringData& s) {
  if (std::abs(s.T) == 0.0) throw std::domain_error("Lambda matrix undefined: T = 0");
}

/// Lambda = (1/T, -R/T; L/T, 1/conj(T)); unimodular.
inline ComplexMatrix2 lambda_matrix(const ScatteringData& s) {
  require_nonzero_transmission(s);
  const Complex inv = 1.0 / s.T;
  return {inv, -s.R * inv, s.L * inv, 1.0 / std::conj(s.T)};
}

/// U_E^{1/2} Lambda U_E^{1/2} as displayed: (e^{ik}/T, -R/T; L/T, e^{-ik}/conj(T)).
inline ComplexMatrix2 lambda_tilde(const ScatteringData& s) {
  require_positive_energy(s.energy, "lambda_tilde");
  ComplexMatrix2 l = lambda_matrix(s);
  const Complex ph = std::polar(1.0, s.k());
  l.m11 *= ph;
  l.m22 *= std::conj(ph);
  return l;
}

/// Per-site chain factor U_E^{-1/2} Lambda U_E^{-1/2}. Products of these,
/// conjugated by U_E^{n+1/2} on both sides, give the Lambda-matrix of a chain
/// with unit spacing (sites ordered left to right).
inline ComplexMatrix2 site_factor(const ScatteringData& s) {
  require_positive_energy(s.energy, "site_factor");
  ComplexMatrix2 l = lambda_matrix(s);
  const Complex ph = std::polar(1.0, -s.k());
  l.m11 *= ph;
  l.m22 *= std::conj(ph);
  return l;
}

/// Inverse of the Lambda display: S-matrix entries of a unimodular Lambda.
inline ScatteringData scattering_from_lambda(const ComplexMatrix2& lam, double E) {
  if (std::abs(lam.m11) == 0.0) throw std::domain_error("scattering_from_lambda: Lambda11 = 0");
  const Complex T = 1.0 / lam.m11;
  return {E, T, -lam.m12 * T, lam.m21 * T};
}

}  // namespace rsbound
