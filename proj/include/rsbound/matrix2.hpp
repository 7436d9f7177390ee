#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

namespace rsbound {

using Complex = std::complex<double>;

namespace detail {
// plain complex product and quotient, without the inf/nan recovery of
// std::complex; operands in this library are finite
inline Complex cmul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}
inline Complex cdiv(Complex a, Complex b) { return cmul(a, std::conj(b)) / std::norm(b); }
}  // namespace detail

/// Real 2x2 matrix acting on (psi, psi') column vectors.
struct RealMatrix2 {
  double m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;

  static constexpr RealMatrix2 identity() { return {}; }
  double det() const { return m11 * m22 - m12 * m21; }

  friend RealMatrix2 operator*(const RealMatrix2& a, const RealMatrix2& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
  }
};

/// Complex 2x2 matrix. Carrier for S, Lambda, U_E, A(E) and chain products.
struct ComplexMatrix2 {
  Complex m11{1.0}, m12{0.0}, m21{0.0}, m22{1.0};

  static ComplexMatrix2 identity() { return {}; }
  static ComplexMatrix2 zero() { return {0.0, 0.0, 0.0, 0.0}; }
  static ComplexMatrix2 diagonal(Complex d1, Complex d2) { return {d1, 0.0, 0.0, d2}; }

  Complex det() const { return m11 * m22 - m12 * m21; }
  Complex trace() const { return m11 + m22; }

  ComplexMatrix2 adjoint() const {
    return {std::conj(m11), std::conj(m21), std::conj(m12), std::conj(m22)};
  }

  double max_abs() const {
    return std::max({std::abs(m11), std::abs(m12), std::abs(m21), std::abs(m22)});
  }

  /// tr(M^dagger M), the squared Frobenius norm.
  double frobenius_sq() const {
    return std::norm(m11) + std::norm(m12) + std::norm(m21) + std::norm(m22);
  }

  bool is_finite() const {
    auto fin = [](Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
    return fin(m11) && fin(m12) && fin(m21) && fin(m22);
  }

  ComplexMatrix2& operator+=(const ComplexMatrix2& o) {
    m11 += o.m11; m12 += o.m12; m21 += o.m21; m22 += o.m22;
    return *this;
  }
  ComplexMatrix2& operator*=(Complex s) {
    m11 *= s; m12 *= s; m21 *= s; m22 *= s;
    return *this;
  }

  friend ComplexMatrix2 operator*(const ComplexMatrix2& a, const ComplexMatrix2& b) {
    using detail::cmul;
    return {cmul(a.m11, b.m11) + cmul(a.m12, b.m21), cmul(a.m11, b.m12) + cmul(a.m12, b.m22),
            cmul(a.m21, b.m11) + cmul(a.m22, b.m21), cmul(a.m21, b.m12) + cmul(a.m22, b.m22)};
  }
  friend ComplexMatrix2 operator*(Complex s, ComplexMatrix2 m) { return m *= s; }
  friend ComplexMatrix2 operator+(ComplexMatrix2 a, const ComplexMatrix2& b) { return a += b; }
  friend ComplexMatrix2 operator-(const ComplexMatrix2& a, const ComplexMatrix2& b) {
    return {a.m11 - b.m11, a.m12 - b.m12, a.m21 - b.m21, a.m22 - b.m22};
  }
};

/// Largest entrywise modulus of a - b.
inline double max_abs_diff(const ComplexMatrix2& a, const ComplexMatrix2& b) {
  return (a - b).max_abs();
}

/// Eigenvalues (ascending) of a Hermitian 2x2 matrix.
inline std::pair<double, double> hermitian_eigenvalues(const ComplexMatrix2& h) {
  const double p = 0.5 * (h.m11.real() + h.m22.real());
  const double q = 0.5 * (h.m11.real() - h.m22.real());
  const double r = std::hypot(q, std::abs(h.m12));
  return {p - r, p + r};
}

}  // namespace rsbound
