#pragma once

// Random chains: coupling sampling, renormalized products of per-site factors,
// Lyapunov exponent and spectral shift density estimates, and exact
// enumeration over short coupling words.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsbound/coupling.hpp"
#include "rsbound/ensemble.hpp"
#include "rsbound/errors.hpp"
#include "rsbound/matrix2.hpp"
#include "rsbound/parallel.hpp"
#include "rsbound/phase.hpp"
#include "rsbound/potential.hpp"
#include "rsbound/rng.hpp"
#include "rsbound/scatterer.hpp"
#include "rsbound/scattering.hpp"

namespace rsbound {

inline constexpr int kDefaultRenormExp = 8;  // rescale when max entry leaves [2^-8, 2^8]
inline constexpr double kDetRelTol = 1e-6;
inline constexpr double kEnumerationBudget = 1e7;
inline constexpr int kDefaultXiSites = 64;
inline constexpr std::int64_t kDetCheckMaxExp2 = 4;

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(realizations)
  std::size_t n_sites = 0;
  std::size_t n_realizations = 0;
  std::uint64_t master_seed = 0;
};

/// Mean and standard error of samples, reduced in index order.
inline MonteCarloEstimate summarize(std::span<const double> samples, std::size_t n_sites, std::uint64_t seed) {
  if (samples.size() < 2) throw std::invalid_argument("summarize: need at least two samples");
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / static_cast<double>(samples.size());
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
  MonteCarloEstimate est{mean, sd / std::sqrt(static_cast<double>(samples.size())), n_sites, samples.size(), seed};
  if (!std::isfinite(est.mean) || !std::isfinite(est.std_error))
    throw ConsistencyError("summarize: non-finite Monte Carlo estimate");
  return est;
}

/// 2n+1 couplings for one realization; the stream depends only on
/// (master_seed, realization_index).
inline Realization sample_couplings(const CouplingDistribution& kappa, std::size_t n, std::uint64_t realization_index,
                                    std::uint64_t master_seed) {
  CounterStream rng(master_seed, realization_index);
  Realization r;
  r.couplings.resize(2 * n + 1);
  for (double& a : r.couplings) a = kappa.quantile(rng.uniform());
  return r;
}

/// Running product 2^exp2 * M.
struct ChainProduct {
  std::int64_t exp2 = 0;
  ComplexMatrix2 M = ComplexMatrix2::identity();

  double log_scale() const { return static_cast<double>(exp2) * std::numbers::ln2; }

  void renormalize(int threshold_exp = kDefaultRenormExp) {
    const double m = M.max_abs();
    if (!std::isfinite(m) || m == 0.0) throw ConsistencyError("chain product degenerate (overflow or zero)");
    if (m <= std::ldexp(1.0, threshold_exp) && m >= std::ldexp(1.0, -threshold_exp)) return;
    int e = 0;
    std::frexp(m, &e);
    auto shift = [e](Complex z) { return Complex{std::ldexp(z.real(), -e), std::ldexp(z.imag(), -e)}; };
    M = {shift(M.m11), shift(M.m12), shift(M.m21), shift(M.m22)};
    exp2 += e;
  }

  void multiply_right(const ComplexMatrix2& f, int threshold_exp = kDefaultRenormExp) {
    M = M * f;
    renormalize(threshold_exp);
  }

  /// |det(true product) - 1|; the factors are unimodular. Only resolvable
  /// while the scale is small: det M = 4^-exp2 sinks below the rounding of
  /// M's entries once exp2 grows, so callers check it only then.
  bool det_resolvable() const { return exp2 <= kDetCheckMaxExp2; }

  double det_defect() const {
    const Complex d = M.det();
    const auto e = static_cast<int>(2 * exp2);
    return std::abs(Complex{std::ldexp(d.real(), e), std::ldexp(d.imag(), e)} - 1.0);
  }

  /// 1/4 tr(P^dagger P) + 1/2 = |T|^-2, returned as log|T| without forming
  /// the scale factor.
  double log_abs_transmission() const {
    const double q = 0.25 * M.frobenius_sq() + std::ldexp(0.5, static_cast<int>(-2 * exp2));
    return -0.5 * (2.0 * log_scale() + std::log(q));
  }
};

namespace detail {

/// Per-site factors for repeated couplings (discrete ensembles).
template <class Scat>
class FactorCache {
 public:
  FactorCache(const Scat& scat, double E) : scat_(scat), E_(E) {}

  const ComplexMatrix2& operator()(double alpha) {
    for (const auto& [a, f] : entries_)
      if (a == alpha) return f;
    if (entries_.size() < kMaxEntries) {
      entries_.emplace_back(alpha, site_factor(scat_(alpha, E_)));
      return entries_.back().second;
    }
    scratch_ = site_factor(scat_(alpha, E_));
    return scratch_;
  }

 private:
  static constexpr std::size_t kMaxEntries = 16;
  const Scat& scat_;
  double E_;
  std::vector<std::pair<double, ComplexMatrix2>> entries_;
  ComplexMatrix2 scratch_;
};

}  // namespace detail

/// Product of per-site factors over j = -n..n, left to right, renormalized.
template <class Scat>
ChainProduct chain_product(const Realization& r, const Scat& scat, double E,
                           int threshold_exp = kDefaultRenormExp) {
  require_positive_energy(E, "chain_product");
  if (r.couplings.empty()) throw std::invalid_argument("chain_product: empty realization");
  detail::FactorCache<Scat> factor(scat, E);
  ChainProduct p;
  for (double alpha : r.couplings) p.multiply_right(factor(alpha), threshold_exp);
  if (p.det_resolvable() && p.det_defect() > kDetRelTol) throw ConsistencyError("chain_product: determinant drifted from 1");
  return p;
}

struct ChainTransmission {
  double log_abs_T = 0.0;
  ChainProduct product;
};

template <class Scat>
ChainTransmission chain_transmission(const Realization& r, const Scat& scat, double E,
                                     int threshold_exp = kDefaultRenormExp) {
  ChainTransmission out;
  out.product = chain_product(r, scat, E, threshold_exp);
  out.log_abs_T = out.product.log_abs_transmission();
  return out;
}

/// Lambda of the whole chain: U^{n+1/2} (prod) U^{n+1/2}. Throws when the
/// unscaled product is not representable.
template <class Scat>
ComplexMatrix2 full_lambda(const Realization& r, const Scat& scat, double E) {
  const ChainProduct p = chain_product(r, scat, E);
  const ComplexMatrix2 u = phase_matrix(E, static_cast<double>(r.n()) + 0.5);
  ComplexMatrix2 lam = u * p.M * u;
  lam *= Complex{std::ldexp(1.0, static_cast<int>(p.exp2))};
  if (!lam.is_finite()) throw std::overflow_error("full_lambda: chain too long to form unscaled");
  return lam;
}

/// (T, R, L) of the whole chain, referenced to the origin. T may underflow for
/// long localized chains; R and L are scale free.
template <class Scat>
ScatteringData chain_scattering(const Realization& r, const Scat& scat, double E) {
  const ChainProduct p = chain_product(r, scat, E);
  const ComplexMatrix2 u = phase_matrix(E, static_cast<double>(r.n()) + 0.5);
  const ComplexMatrix2 lam = u * p.M * u;
  if (std::abs(lam.m11) == 0.0) throw std::domain_error("chain_scattering: Lambda11 = 0");
  const Complex inv = 1.0 / lam.m11;
  const Complex T{std::ldexp(inv.real(), static_cast<int>(-p.exp2)), std::ldexp(inv.imag(), static_cast<int>(-p.exp2))};
  return {E, T, -lam.m12 * inv, lam.m21 * inv};
}

/// -log|T^(n)| / (2n+1) averaged over independent realizations.
template <class Scat>
MonteCarloEstimate lyapunov_mc(const CouplingDistribution& kappa, const Scat& scat, double E, std::size_t n,
                               std::size_t n_realizations, std::uint64_t master_seed, unsigned threads = 1) {
  require_positive_energy(E, "lyapunov_mc");
  if (n < 1) throw std::invalid_argument("lyapunov_mc: n must be >= 1");
  if (n_realizations < 2) throw std::invalid_argument("lyapunov_mc: need at least two realizations");
  const double sites = static_cast<double>(2 * n + 1);
  std::vector<double> samples(n_realizations);
  parallel_for(n_realizations, threads, [&](std::size_t i) {
    const Realization r = sample_couplings(kappa, n, i, master_seed);
    samples[i] = -chain_transmission(r, scat, E).log_abs_T / sites;
  });
  return summarize(samples, 2 * n + 1, master_seed);
}

/// Phase correction for joining block 1 (left) to block 2 (right):
/// T_12 = T_1 T_2 / (1 - R_1 L_2), so xi_12 = (1/pi) arg(1 - R_1 L_2)
///       = -(1/pi) arctan(a1 a2 sin(phi) / (1 - a1 a2 cos(phi))), phi = arg(R_1 L_2).
inline double pair_concatenation_correction(Complex r1, Complex l2) {
  const double a = std::abs(r1) * std::abs(l2);
  if (!(a < 1.0)) throw std::domain_error("pair_concatenation_correction: |R1||L2| must be < 1");
  if (a == 0.0) return 0.0;
  const double phi = std::arg(r1) + std::arg(l2);
  return -std::atan2(a * std::sin(phi), 1.0 - a * std::cos(phi)) / std::numbers::pi;
}

inline double pair_concatenation_correction(const ScatteringData& s1, const ScatteringData& s2) {
  return pair_concatenation_correction(s1.R, s2.L);
}

/// min(1/2, a1 a2 / (pi (1 - a1 a2))).
inline double pair_correction_bound(double a1, double a2) {
  const double a = a1 * a2;
  if (a >= 1.0) return 0.5;
  return std::min(0.5, a / (std::numbers::pi * (1.0 - a)));
}

/// Single-site data for one coupling over an energy list.
struct SiteSeries {
  std::vector<ScatteringData> s;
  std::vector<double> xi;
};

inline SiteSeries site_series(const Scatterer& scat, double alpha, std::span<const double> energies) {
  SiteSeries out;
  out.s.reserve(energies.size());
  for (double E : energies) out.s.push_back(scat(alpha, E));
  out.xi = single_site_xi(scat, alpha, energies);
  return out;
}

enum class XiRoute { additive, unwrap };

/// Spectral shift xi^(n)(E) of one chain, built site by site from the left:
/// xi <- xi + xi_j + (1/pi) arg(1 - R_block L_j). Also returns the telescoped
/// per-site bound sum_j min(1/2, |R_j|/(pi(1-|R_j|))).
struct ChainXi {
  double xi = 0.0;
  double telescoped_bound = 0.0;
  double max_pair_excess = 0.0;  // max over joins of |xi_12| - bound (<= 0 when the bound holds)
};

template <class SiteAt>
ChainXi chain_xi_additive(std::size_t n_sites, double E, SiteAt&& site_at) {
  using detail::cmul;
  const double k = std::sqrt(E);
  const auto n = static_cast<long>((n_sites - 1) / 2);
  ChainXi out;
  out.max_pair_excess = n_sites == 1 ? 0.0 : -std::numeric_limits<double>::infinity();
  Complex r_block{0.0};
  // e^{2ikj}, advanced by one site per step; re-anchored every 256 sites
  const Complex step = std::polar(1.0, 2.0 * k);
  Complex shift{1.0};
  for (std::size_t idx = 0; idx < n_sites; ++idx) {
    if (idx % 256 == 0) shift = std::polar(1.0, 2.0 * k * static_cast<double>(static_cast<long>(idx) - n));
    const auto& [s, xi_j] = site_at(idx);
    const Complex rj = cmul(s.R, std::conj(shift));
    const Complex lj = cmul(s.L, shift);
    shift = cmul(shift, step);
    const double ar = std::sqrt(std::norm(s.R));
    out.telescoped_bound += reflection_term(ar);
    out.xi += xi_j;
    if (idx == 0) {
      r_block = rj;
      continue;
    }
    // same value as pair_concatenation_correction(r_block, lj)
    const Complex d = 1.0 - cmul(r_block, lj);
    const double c = std::atan2(d.imag(), d.real()) / std::numbers::pi;
    out.xi += c;
    out.max_pair_excess =
        std::max(out.max_pair_excess, std::abs(c) - pair_correction_bound(std::sqrt(std::norm(r_block)), ar));
    r_block = rj + cmul(cmul(s.T, s.T), detail::cdiv(r_block, d));
  }
  return out;
}

struct ChainXiPoint {
  double energy;
  double xi_density;  // xi^(n) / (2n+1)
  double telescoped_bound;  // per site
};

/// Spectral shift density of one realization on an ascending energy grid.
/// The additive route is branch free; the unwrap route continues arg T^(n)
/// down from a high anchor energy and is kept as an independent check.
inline std::vector<ChainXiPoint> chain_spectral_shift(const Realization& r, const Scatterer& scat,
                                                      std::span<const double> grid,
                                                      XiRoute route = XiRoute::additive) {
  require_ascending_positive(grid, "chain_spectral_shift");
  const double sites = static_cast<double>(r.sites());
  std::map<double, SiteSeries> table;
  for (double a : r.couplings)
    if (!table.contains(a)) table.emplace(a, site_series(scat, a, grid));

  std::vector<ChainXiPoint> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto cx = chain_xi_additive(r.sites(), grid[i], [&](std::size_t idx) {
      const auto& ser = table.at(r.couplings[idx]);
      return std::pair<const ScatteringData&, double>{ser.s[i], ser.xi[i]};
    });
    out[i] = {grid[i], cx.xi / sites, cx.telescoped_bound / sites};
  }
  if (route == XiRoute::additive) return out;

  double total = 0.0;
  for (double a : r.couplings) total += std::abs(a);
  const double e_max = anchor_energy(total, scat.abs_integral());
  const auto ext = continuation_grid(grid, e_max);
  auto raw = [&](double E) { return std::arg(chain_scattering(r, scat, E).T); };
  const auto delta = unwrap_phase(ext, raw);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto it = std::lower_bound(ext.begin(), ext.end(), grid[i] * (1.0 - 1e-14));
    out[i].xi_density = -delta[static_cast<std::size_t>(it - ext.begin())] / std::numbers::pi / sites;
  }
  return out;
}

/// Spectral shift density estimate at each energy: one sample per realization.
struct XiEstimate {
  MonteCarloEstimate xi;
  double telescoped_bound = 0.0;  // realization average of the per-site bound
};

inline std::vector<XiEstimate> xi_mc(const CouplingDistribution& kappa, const Scatterer& scat,
                                     std::span<const double> energies, std::size_t n, std::size_t n_realizations,
                                     std::uint64_t master_seed, unsigned threads = 1,
                                     XiRoute route = XiRoute::additive) {
  for (double E : energies) require_positive_energy(E, "xi_mc");
  if (n_realizations < 2) throw std::invalid_argument("xi_mc: need at least two realizations");
  // discrete ensembles: per-atom tables shared read-only by all workers
  std::map<double, SiteSeries> shared;
  if (kappa.is_discrete())
    for (const auto& atom : kappa.nodes())
      if (!shared.contains(atom.alpha)) shared.emplace(atom.alpha, site_series(scat, atom.alpha, energies));

  const std::size_t m = energies.size();
  std::vector<double> xi(n_realizations * m), bound(n_realizations * m);
  parallel_for(n_realizations, threads, [&](std::size_t i) {
    const Realization r = sample_couplings(kappa, n, i, master_seed);
    if (route == XiRoute::unwrap) {
      const auto pts = chain_spectral_shift(r, scat, energies, XiRoute::unwrap);
      for (std::size_t e = 0; e < m; ++e) {
        xi[i * m + e] = pts[e].xi_density;
        bound[i * m + e] = pts[e].telescoped_bound;
      }
      return;
    }
    std::map<double, SiteSeries> local;
    auto series = [&](double a) -> const SiteSeries& {
      if (auto it = shared.find(a); it != shared.end()) return it->second;
      auto it = local.find(a);
      if (it == local.end()) it = local.emplace(a, site_series(scat, a, energies)).first;
      return it->second;
    };
    std::vector<const SiteSeries*> per_site;
    per_site.reserve(r.sites());
    for (double a : r.couplings) per_site.push_back(&series(a));
    const double sites = static_cast<double>(r.sites());
    for (std::size_t e = 0; e < m; ++e) {
      const auto cx = chain_xi_additive(r.sites(), energies[e], [&](std::size_t idx) {
        return std::pair<const ScatteringData&, double>{per_site[idx]->s[e], per_site[idx]->xi[e]};
      });
      xi[i * m + e] = cx.xi / sites;
      bound[i * m + e] = cx.telescoped_bound / sites;
    }
  });

  std::vector<XiEstimate> out(m);
  std::vector<double> col(n_realizations);
  for (std::size_t e = 0; e < m; ++e) {
    double b = 0.0;
    for (std::size_t i = 0; i < n_realizations; ++i) {
      col[i] = xi[i * m + e];
      b += bound[i * m + e];
    }
    out[e] = {summarize(col, 2 * n + 1, master_seed), b / static_cast<double>(n_realizations)};
  }
  return out;
}

/// E{tr(P^dagger P)} over all coupling words of length 2n+1, P the product of
/// per-site factors. Equals tr A_{2n+1}.
template <class Scat>
double exact_expectation_trace(const CouplingDistribution& kappa, const Scat& scat, double E, std::size_t n) {
  require_positive_energy(E, "exact_expectation_trace");
  if (!kappa.is_discrete()) throw std::invalid_argument("exact_expectation_trace: coupling distribution must be discrete");
  const auto& atoms = kappa.nodes();
  const std::size_t len = 2 * n + 1;
  if (std::pow(static_cast<double>(atoms.size()), static_cast<double>(len)) > kEnumerationBudget)
    throw std::length_error("exact_expectation_trace: enumeration budget (1e7 words) exceeded");
  std::vector<ComplexMatrix2> factors;
  for (const auto& a : atoms) factors.push_back(site_factor(scat(a.alpha, E)));
  double total = 0.0;
  auto walk = [&](auto& self, const ComplexMatrix2& prefix, double weight, std::size_t depth) -> void {
    if (depth == len) {
      total += weight * prefix.frobenius_sq();
      return;
    }
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (atoms[i].weight > 0.0) self(self, prefix * factors[i], weight * atoms[i].weight, depth + 1);
  };
  walk(walk, ComplexMatrix2::identity(), 1.0, 0);
  return total;
}

}  // namespace rsbound
