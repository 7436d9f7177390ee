#pragma once

// The four CLI subcommands. Each reads a RunConfig, writes its CSV (and a run
// manifest) atomically under output.dir, and returns a process exit code.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rsbound/config.hpp"
#include "rsbound/csv.hpp"
#include "rsbound/ensemble.hpp"
#include "rsbound/errors.hpp"
#include "rsbound/kronig_penney.hpp"
#include "rsbound/montecarlo.hpp"
#include "rsbound/verify.hpp"

#ifndef RSBOUND_VERSION
#define RSBOUND_VERSION "1.0.0"
#endif

namespace rsbound {

enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitConfig = 2, kExitUnwrap = 3, kExitInternal = 4 };

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides mc.seed
  unsigned threads = 1;
  bool quiet = false;
};

inline const std::vector<std::string>& gamma_csv_header() {
  static const std::vector<std::string> h{"E", "gamma_mc", "gamma_stderr", "gamma_tilde", "beta_plus", "beta_minus"};
  return h;
}

inline const std::vector<std::string>& ids_csv_header() {
  static const std::vector<std::string> h{"E",   "xi_mc",       "xi_stderr", "xi_single_mean", "r",
                                          "r_pointwise", "N_mc", "N_lower",   "N_upper",        "N_free"};
  return h;
}

namespace commands_detail {

inline std::filesystem::path output_path(const RunConfig& cfg, const std::string& name) {
  return std::filesystem::path(cfg.output.dir) / (cfg.output.prefix + name);
}

inline void write_manifest(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& outputs) {
  Json m;
  m["tool"] = "rsbound";
  m["version"] = RSBOUND_VERSION;
  m["command"] = command;
  m["seed"] = cfg.mc.seed;
  m["compiler"] = __VERSION__;
  m["cplusplus"] = static_cast<long>(__cplusplus);
  m["outputs"] = outputs;
  m["config"] = cfg.raw;
  write_file_atomic(output_path(cfg, command + "_manifest.json"), m.dump(2) + "\n");
}

inline std::string flag(bool pass) { return pass ? "1" : "0"; }

inline int sweep_gamma(const RunConfig& cfg, std::ostream& log) {
  CsvTable t(gamma_csv_header());
  for (double E : cfg.energies) {
    const auto em = ensemble_matrices(cfg.kappa, cfg.scatterer, E);
    const auto g = lyapunov_mc(cfg.kappa, cfg.scatterer, E, cfg.mc.n_gamma, cfg.mc.realizations, cfg.mc.seed,
                               cfg.mc.threads);
    t.add_row({E, g.mean, g.std_error, em.gamma_tilde, em.beta_plus, em.beta_minus});
    log << "E=" << E << "  gamma=" << g.mean << " +- " << g.std_error << "  gamma_tilde=" << em.gamma_tilde << "\n";
  }
  write_file_atomic(output_path(cfg, "gamma.csv"), t.str());
  write_manifest(cfg, "sweep-gamma", {cfg.output.prefix + "gamma.csv"});
  return kExitOk;
}

inline int sweep_ids(const RunConfig& cfg, std::ostream& log) {
  const auto xi = xi_mc(cfg.kappa, cfg.scatterer, cfg.energies, cfg.mc.n_xi, cfg.mc.realizations, cfg.mc.seed,
                        cfg.mc.threads, cfg.mc.xi_route);
  const auto single = mean_single_site_xi(cfg.kappa, cfg.scatterer, cfg.energies);
  CsvTable t(ids_csv_header());
  for (std::size_t i = 0; i < cfg.energies.size(); ++i) {
    const double E = cfg.energies[i];
    const auto renv = r_of_E(cfg.kappa, cfg.scatterer, E);
    const auto env = ids_envelope(E, single[i], renv.r);
    const double n_mc = env.n_free - xi[i].xi.mean;
    t.add_row({E, xi[i].xi.mean, xi[i].xi.std_error, single[i], renv.r, renv.r_pointwise, n_mc, env.lower, env.upper,
               env.n_free});
    log << "E=" << E << "  N=" << n_mc << "  in [" << env.lower << ", " << env.upper << "]\n";
  }
  write_file_atomic(output_path(cfg, "ids.csv"), t.str());
  write_manifest(cfg, "sweep-ids", {cfg.output.prefix + "ids.csv"});
  return kExitOk;
}

inline int verify(const RunConfig& cfg, std::ostream& log) {
  BoundReportOptions opt;
  opt.sigmas = cfg.tolerances.sigmas;
  const auto rows = bound_report(cfg.kappa, cfg.scatterer, cfg.energies, cfg.mc, opt);
  CsvTable t({"E", "gamma_mc", "gamma_stderr", "gamma_tilde", "gamma_pass", "xi_mc", "xi_stderr", "xi_single_mean",
              "r", "r_pointwise", "xi_pass", "N_mc", "N_lower", "N_upper", "N_free", "ids_pass"});
  bool all = true;
  log << std::left << std::setw(12) << "E" << std::setw(26) << "gamma <= gamma_tilde" << std::setw(26)
      << "xi in envelope" << "N in envelope\n";
  for (const auto& r : rows) {
    t.add_row({format_number(r.energy), format_number(r.gamma.mean), format_number(r.gamma.std_error),
               format_number(r.gamma_tilde), flag(r.gamma_pass), format_number(r.xi.mean),
               format_number(r.xi.std_error), format_number(r.xi_single_mean), format_number(r.r),
               format_number(r.r_pointwise), flag(r.xi_pass), format_number(r.n_mc), format_number(r.n_lower),
               format_number(r.n_upper), format_number(r.n_free), flag(r.ids_pass)});
    all = all && r.pass();
    log << std::setw(12) << r.energy << std::setw(26) << (r.gamma_pass ? "PASS" : "FAIL") << std::setw(26)
        << (r.xi_pass ? "PASS" : "FAIL") << (r.ids_pass ? "PASS" : "FAIL") << "\n";
  }
  std::vector<std::string> outputs{cfg.output.prefix + "verify.csv"};
  write_file_atomic(output_path(cfg, "verify.csv"), t.str());

  if (cfg.thouless) {
    ThoulessParams p = cfg.thouless->params;
    p.seed = cfg.mc.seed;
    p.threads = cfg.mc.threads;
    CsvTable th({"grid", "points", "E_check", "lhs", "rhs", "residual", "pass"});
    const auto coarse = thouless_residual(cfg.kappa, cfg.scatterer, cfg.thouless->e_check, p);
    const bool coarse_pass = coarse.residual <= cfg.tolerances.thouless;
    th.add_row({"default", std::to_string(coarse.grid_points), format_number(coarse.e_check), format_number(coarse.lhs),
                format_number(coarse.rhs), format_number(coarse.residual), flag(coarse_pass)});
    all = all && coarse_pass;
    log << "thouless E=" << coarse.e_check << "  residual=" << coarse.residual << (coarse_pass ? "  PASS" : "  FAIL")
        << "\n";
    if (cfg.thouless->refine) {
      p.grid = p.grid.refined();
      const auto fine = thouless_residual(cfg.kappa, cfg.scatterer, cfg.thouless->e_check, p);
      const bool trend = fine.residual <= cfg.tolerances.thouless &&
                         fine.residual <= coarse.residual * (1.0 + cfg.tolerances.thouless_refinement_slack);
      th.add_row({"refined", std::to_string(fine.grid_points), format_number(fine.e_check), format_number(fine.lhs),
                  format_number(fine.rhs), format_number(fine.residual), flag(trend)});
      all = all && trend;
      log << "thouless refined  residual=" << fine.residual << (trend ? "  PASS" : "  FAIL") << "\n";
    }
    write_file_atomic(output_path(cfg, "thouless.csv"), th.str());
    outputs.push_back(cfg.output.prefix + "thouless.csv");
  }
  write_manifest(cfg, "verify", outputs);
  log << (all ? "all checks passed\n" : "some checks FAILED\n");
  return all ? kExitOk : kExitVerifyFailed;
}

/// Ensemble entries for the point interaction: the derived closed form, the
/// generic route through scattering data, and the displayed closed forms.
inline int kp_demo(const RunConfig& cfg, std::ostream& log) {
  const Scatterer delta(FormalDelta{});
  CsvTable t({"E", "a", "abs_b", "beta_plus", "gamma_tilde", "a_generic", "abs_b_generic", "beta_plus_generic",
              "a_printed", "abs_b_printed", "beta_plus_printed_ab", "beta_plus_printed_closed",
              "gamma_tilde_printed", "beta_plus_printed_general", "r", "mean_ratio", "ratio_env_lower",
              "ratio_env_upper"});
  for (double E : cfg.energies) {
    const auto d = kp_ensemble_ab(cfg.kappa, E);
    const auto g = ensemble_matrices(cfg.kappa, delta, E);
    const auto p = kp_ensemble_ab_printed(cfg.kappa, E);
    const auto pg = kp_ensemble_ab_printed_general(cfg.kappa, E);
    const double bp_closed = kp_beta_plus_printed(cfg.kappa, E);
    const auto renv = r_of_E(cfg.kappa, delta, E);
    const auto env = kp_r_envelope(cfg.kappa, E);
    t.add_row({E, d.a, std::abs(d.b), d.beta_plus(), d.gamma_tilde(), g.a, std::abs(g.b), g.beta_plus, p.a,
               std::abs(p.b), p.beta_plus(), bp_closed, 0.5 * std::log(bp_closed), pg.beta_plus(), renv.r, renv.mean_ratio,
               env.lower, env.upper});
    log << "E=" << E << "  beta_plus derived=" << d.beta_plus() << " generic=" << g.beta_plus
        << " printed=" << bp_closed << "\n";
  }
  write_file_atomic(output_path(cfg, "kp_demo.csv"), t.str());
  write_manifest(cfg, "kp-demo", {cfg.output.prefix + "kp_demo.csv"});
  return kExitOk;
}

}  // namespace commands_detail

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"sweep-gamma", "sweep-ids", "verify", "kp-demo"};
  return names;
}

/// Runs one subcommand; errors are reported on `err` and mapped to exit codes.
inline int run_command(const std::string& command, const std::string& config_path, const RunOptions& opt,
                       std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::ostream null_stream(nullptr);
  std::ostream& log = opt.quiet ? null_stream : out;
  try {
    RunConfig cfg = load_config(config_path);
    if (opt.seed) {
      cfg.mc.seed = *opt.seed;
      cfg.raw["mc"]["seed"] = *opt.seed;
    }
    if (opt.threads == 0) throw ConfigError("threads", "must be positive");
    cfg.mc.threads = opt.threads;
    if (command == "sweep-gamma") return commands_detail::sweep_gamma(cfg, log);
    if (command == "sweep-ids") return commands_detail::sweep_ids(cfg, log);
    if (command == "verify") return commands_detail::verify(cfg, log);
    if (command == "kp-demo") return commands_detail::kp_demo(cfg, log);
    err << "unknown command '" << command << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnwrapError& e) {
    err << e.what() << "\n";
    return kExitUnwrap;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace rsbound
