#pragma once

// Run configuration: one JSON document describing the potential, the coupling
// distribution, the energy sweep, Monte Carlo sizes, output location and
// tolerances. Every validation failure names the offending key.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rsbound/coupling.hpp"
#include "rsbound/errors.hpp"
#include "rsbound/phase.hpp"
#include "rsbound/potential.hpp"
#include "rsbound/scatterer.hpp"
#include "rsbound/verify.hpp"

namespace rsbound {

using Json = nlohmann::json;

/// Smallest admissible energy unless the config lowers it; T vanishes at E = 0.
inline constexpr double kDefaultEnergyFloor = 1e-4;

struct OutputConfig {
  std::string dir = ".";
  std::string prefix;
};

struct Tolerances {
  double sigmas = 3.0;
  double thouless = 0.1;
  double thouless_refinement_slack = 0.2;  // refined residual may exceed the coarse one by this fraction
};

struct ThoulessConfig {
  double e_check = 2.0;
  ThoulessParams params;
  bool refine = true;
};

struct RunConfig {
  Json raw;
  Scatterer scatterer;
  CouplingDistribution kappa;
  std::vector<double> energies;
  McParams mc;
  OutputConfig output;
  Tolerances tolerances;
  std::optional<ThoulessConfig> thouless;
};

namespace config_detail {

/// A JSON object plus its dotted path, with unknown-key rejection.
class Section {
 public:
  Section(const Json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "must be an object");
    for (const auto& [k, v] : j_.items())
      if (!allowed.contains(k)) throw ConfigError(key(k), "unknown key");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string& k) const { return j_.contains(k); }
  const Json& at(const std::string& k) const {
    if (!j_.contains(k)) throw ConfigError(key(k), "missing required key");
    return j_.at(k);
  }

  double number(const std::string& k) const {
    const Json& v = at(k);
    if (!v.is_number()) throw ConfigError(key(k), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key(k), "must be finite");
    return d;
  }
  double number(const std::string& k, double fallback) const { return has(k) ? number(k) : fallback; }

  std::uint64_t unsigned_integer(const std::string& k) const {
    const Json& v = at(k);
    if (!v.is_number_unsigned()) throw ConfigError(key(k), "must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t unsigned_integer(const std::string& k, std::uint64_t fallback) const {
    return has(k) ? unsigned_integer(k) : fallback;
  }

  std::string string(const std::string& k) const {
    const Json& v = at(k);
    if (!v.is_string()) throw ConfigError(key(k), "must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& k, const std::string& fallback) const { return has(k) ? string(k) : fallback; }

  bool boolean(const std::string& k, bool fallback) const {
    if (!has(k)) return fallback;
    if (!at(k).is_boolean()) throw ConfigError(key(k), "must be true or false");
    return at(k).get<bool>();
  }

  std::vector<double> numbers(const std::string& k) const {
    const Json& v = at(k);
    if (!v.is_array()) throw ConfigError(key(k), "must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(key(k), "must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

 private:
  const Json& j_;
  std::string path_;
};

/// Rethrows library validation errors as ConfigError under `key`.
template <class F>
auto guarded(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

inline Scatterer parse_potential(const Json& j) {
  const Section s(j, "potential", {"type", "width", "height", "sigma", "amplitude", "eps", "x0", "dx", "values",
                                   "samples", "cells", "steps"});
  const std::string type = s.string("type");
  const auto cells = static_cast<std::size_t>(s.unsigned_integer("cells", kDefaultGridCells));
  const auto steps = s.unsigned_integer("steps", kDefaultSteps);
  if (steps < static_cast<std::uint64_t>(kMinSteps) || steps > (1u << 24))
    throw ConfigError(s.key("steps"), "must be in [16, 2^24]");
  if (cells < 1) throw ConfigError(s.key("cells"), "must be positive");
  return guarded("potential", [&]() -> Scatterer {
    SingleSitePotential p = FormalDelta{};
    if (type == "delta") {
      p = FormalDelta{};
    } else if (type == "square") {
      p = shapes::square(s.number("width", 0.5), s.number("height", 1.0), cells);
    } else if (type == "gaussian_truncated") {
      p = shapes::gaussian_truncated(s.number("sigma", 0.1), s.number("amplitude", 1.0), cells);
    } else if (type == "cosine_bump") {
      p = shapes::cosine_bump(s.number("amplitude", 1.0), cells);
    } else if (type == "ramp") {
      p = shapes::ramp(s.number("amplitude", 1.0), cells);
    } else if (type == "delta_approximant") {
      p = shapes::delta_approximant(s.number("eps"));
    } else if (type == "grid" && s.has("samples")) {
      // [[x, f(x)], ...] on a uniform sorted grid
      std::vector<std::pair<double, double>> samples;
      for (const auto& pt : s.at("samples")) {
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number())
          throw ConfigError(s.key("samples"), "each sample must be [x, value]");
        samples.emplace_back(pt[0].get<double>(), pt[1].get<double>());
      }
      p = GridPotential::from_samples(samples);
    } else if (type == "grid") {
      p = GridPotential(s.number("x0"), s.number("dx"), s.numbers("values"));
    } else {
      throw ConfigError(s.key("type"), "unknown potential type '" + type + "'");
    }
    return Scatterer(std::move(p), static_cast<int>(steps));
  });
}

inline CouplingDistribution parse_kappa(const Json& j) {
  const Section s(j, "kappa", {"type", "atoms", "alpha", "a", "min", "max", "order", "coefficients"});
  const std::string type = s.string("type");
  const int order = static_cast<int>(s.unsigned_integer("order", kDefaultQuadratureOrder));
  if (type == "discrete") {
    const Json& atoms = s.at("atoms");
    if (!atoms.is_array() || atoms.empty()) throw ConfigError(s.key("atoms"), "must be a nonempty array");
    std::vector<QuadratureNode> nodes;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const Section a(atoms[i], s.key("atoms") + "[" + std::to_string(i) + "]", {"alpha", "weight"});
      nodes.push_back({a.number("alpha"), a.number("weight")});
    }
    return guarded(s.key("atoms"), [&] { return CouplingDistribution::discrete(std::move(nodes)); });
  }
  if (type == "point_mass") return CouplingDistribution::point_mass(s.number("alpha"));
  if (type == "bernoulli") return CouplingDistribution::symmetric_bernoulli(s.number("a"));
  if (type == "uniform")
    return guarded("kappa", [&] { return CouplingDistribution::uniform(s.number("min"), s.number("max"), order); });
  if (type == "polynomial_density") {
    const auto c = s.numbers("coefficients");
    auto rho = [c](double a) {
      double v = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * a + *it;
      return v;
    };
    return guarded("kappa", [&] { return CouplingDistribution::density(s.number("min"), s.number("max"), rho, order); });
  }
  throw ConfigError(s.key("type"), "unknown distribution type '" + type + "'");
}

inline std::vector<double> parse_energies(const Json& j) {
  const Section s(j, "energies", {"min", "max", "count", "spacing", "values", "e_min"});
  const double e_min = s.number("e_min", kDefaultEnergyFloor);
  std::vector<double> grid;
  if (s.has("values")) {
    grid = s.numbers("values");
  } else {
    const double lo = s.number("min"), hi = s.number("max");
    const auto count = static_cast<std::size_t>(s.unsigned_integer("count"));
    const std::string spacing = s.string("spacing", "log");
    if (count == 1) {
      if (lo != hi) throw ConfigError(s.key("count"), "count 1 requires min == max");
      grid = {lo};
    } else if (spacing == "log") {
      grid = guarded("energies", [&] { return log_energy_grid(lo, hi, count); });
    } else if (spacing == "linear") {
      grid = guarded("energies", [&] { return linear_energy_grid(lo, hi, count); });
    } else {
      throw ConfigError(s.key("spacing"), "must be 'log' or 'linear'");
    }
  }
  guarded("energies", [&] {
    require_ascending_positive(grid, "energies");
    return 0;
  });
  if (grid.front() < e_min) throw ConfigError(s.key("min"), "energies must be >= e_min (" + std::to_string(e_min) + ")");
  return grid;
}

inline std::size_t positive_count(const Section& s, const std::string& k, std::size_t fallback, std::size_t min) {
  const auto v = static_cast<std::size_t>(s.unsigned_integer(k, fallback));
  if (v < min) throw ConfigError(s.key(k), "must be >= " + std::to_string(min));
  return v;
}

}  // namespace config_detail

inline RunConfig parse_config(const Json& j) {
  using config_detail::Section;
  const Section root(j, "", {"potential", "kappa", "energies", "mc", "output", "tolerances", "thouless"});

  McParams mc;
  if (root.has("mc")) {
    const Section s(root.at("mc"), "mc", {"n", "n_xi", "realizations", "seed", "xi_route"});
    mc.n_gamma = config_detail::positive_count(s, "n", mc.n_gamma, 1);
    mc.n_xi = static_cast<std::size_t>(s.unsigned_integer("n_xi", mc.n_xi));
    mc.realizations = config_detail::positive_count(s, "realizations", mc.realizations, 2);
    mc.seed = s.unsigned_integer("seed", mc.seed);
    const std::string route = s.string("xi_route", "additive");
    if (route == "unwrap") {
      mc.xi_route = XiRoute::unwrap;
    } else if (route != "additive") {
      throw ConfigError(s.key("xi_route"), "must be 'additive' or 'unwrap'");
    }
  }

  OutputConfig out;
  if (root.has("output")) {
    const Section s(root.at("output"), "output", {"dir", "prefix"});
    out.dir = s.string("dir", out.dir);
    out.prefix = s.string("prefix", out.prefix);
  }

  Tolerances tol;
  if (root.has("tolerances")) {
    const Section s(root.at("tolerances"), "tolerances", {"sigmas", "thouless", "thouless_refinement_slack"});
    tol.sigmas = s.number("sigmas", tol.sigmas);
    tol.thouless = s.number("thouless", tol.thouless);
    tol.thouless_refinement_slack = s.number("thouless_refinement_slack", tol.thouless_refinement_slack);
    if (!(tol.sigmas >= 0.0)) throw ConfigError("tolerances.sigmas", "must be nonnegative");
    if (!(tol.thouless > 0.0)) throw ConfigError("tolerances.thouless", "must be positive");
  }

  std::optional<ThoulessConfig> th;
  if (root.has("thouless")) {
    const Section s(root.at("thouless"), "thouless",
                    {"e_check", "h", "linear_max", "e_max", "per_decade", "n_xi", "n", "realizations", "refine"});
    ThoulessConfig t;
    t.e_check = s.number("e_check", t.e_check);
    auto& g = t.params.grid;
    g.h = s.number("h", g.h);
    g.linear_max = s.number("linear_max", g.linear_max);
    g.e_max = s.number("e_max", g.e_max);
    g.per_decade = static_cast<int>(config_detail::positive_count(s, "per_decade", static_cast<std::size_t>(g.per_decade), 1));
    t.params.n_xi = static_cast<std::size_t>(s.unsigned_integer("n_xi", t.params.n_xi));
    t.params.n_gamma = config_detail::positive_count(s, "n", t.params.n_gamma, 1);
    t.params.realizations = config_detail::positive_count(s, "realizations", t.params.realizations, 2);
    t.refine = s.boolean("refine", t.refine);
    if (!(t.e_check > 0.0)) throw ConfigError("thouless.e_check", "must be positive");
    if (!(g.h > 0.0)) throw ConfigError("thouless.h", "must be positive");
    if (!(t.e_check + 2.0 * g.h <= g.linear_max && t.e_check - 2.0 * g.h > 0.0))
      throw ConfigError("thouless.e_check", "PV window of two cells must fit inside (0, linear_max]");
    if (!(g.e_max > g.linear_max)) throw ConfigError("thouless.e_max", "must exceed linear_max");
    th = t;
  }

  RunConfig cfg{j,
                config_detail::parse_potential(root.at("potential")),
                config_detail::parse_kappa(root.at("kappa")),
                config_detail::parse_energies(root.at("energies")),
                mc,
                out,
                tol,
                th};
  if (cfg.thouless && cfg.kappa.support().first < 0.0)
    throw ConfigError("thouless", "requires nonnegative couplings (kappa support in [0, inf))");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  Json j;
  try {
    j = Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError("config", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace rsbound
