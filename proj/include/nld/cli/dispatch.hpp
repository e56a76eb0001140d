#ifndef NLD_CLI_DISPATCH_HPP
#define NLD_CLI_DISPATCH_HPP

// Command dispatch and artifact writing. Exit codes: 0 success, 1 error or
// failed verification, 2 solver refusal.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "nld/cli/config.hpp"
#include "nld/cli/instance.hpp"
#include "nld/cli/verify.hpp"
#include "nld/simulator.hpp"
#include "nld/sis.hpp"
#include "nld/spectral.hpp"
#include "nld/variational.hpp"

namespace nld::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitRefused = 2;

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"spectral", "r0", "sweep", "simulate", "verify"};
  return c;
}

namespace detail {

/// 17 significant digits, with inf and nan spelled out.
inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// JSON has no infinities; non-finite values are written as strings.
inline json jnum(double v) { return std::isfinite(v) ? json(v) : json(fmt17(v)); }

inline json jvec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(jnum(v[i]));
  return a;
}

inline json stamp(const RunConfig& cfg, const std::string& command) {
  return {{"command", command}, {"config", cfg.source}, {"config_hash", cfg.config_hash},
          {"seed", cfg.seed}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline std::string csv_header(const RunConfig& cfg) {
  return "# config_hash=" + cfg.config_hash + " seed=" + std::to_string(cfg.seed) + "\n";
}

inline std::string csv_row(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt17(v[i]);
  }
  return s + "\n";
}

inline json spectral_json(const SpectralReport& r) {
  json j{{"bound", jnum(r.bound)},
         {"essential_bound", jnum(r.essential_bound)},
         {"principal_exists", r.principal_exists},
         {"method", to_string(r.method)},
         {"residual", jnum(r.residual)},
         {"iterations", r.iterations}};
  if (r.principal_vector) j["principal_vector"] = jvec(*r.principal_vector);
  return j;
}

inline json r0_json(const R0Report& r) {
  json j{{"R0", jnum(r.value())},
         {"mu0_bisection", jnum(r.mu0_bisection)},
         {"mu0_next_generation", jnum(r.mu0_next_generation)},
         {"cw_lower", jnum(r.cw_lower)},
         {"cw_upper", jnum(r.cw_upper)},
         {"agreement", jnum(r.agreement)},
         {"tolerance", jnum(r.tolerance)},
         {"flagged", r.flagged},
         {"s_at_mu0", jnum(r.s_at_mu0)}};
  j["mu0_rayleigh"] = r.mu0_rayleigh ? jnum(*r.mu0_rayleigh) : json(nullptr);
  return j;
}

inline std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
  return std::filesystem::path(cfg.out_dir) / name;
}

inline int cmd_spectral(const RunConfig& cfg, std::ostream& log) {
  const AssembledOperator op = spectral_operator(cfg);
  const SpectralReport sr = spectral_bound(op, cfg.solver.spectral_tol, cfg.solver.max_iter);
  json j = stamp(cfg, "spectral");
  j["operator"] = {{"species", op.species()}, {"nodes", op.nodes()}, {"neumann", op.neumann},
                   {"shift_c", jnum(op.shift_c)}, {"symmetric", op.asymmetry() <= 1e-10}};
  if (cfg.mu) j["operator"]["mu"] = jnum(*cfg.mu);
  j["warnings"] = op.warnings;
  j["report"] = spectral_json(sr);
  if (op.asymmetry() <= 1e-10)
    j["rayleigh"] = spectral_json(rayleigh_bound(op, cfg.solver.spectral_tol, cfg.solver.max_iter));
  if (cfg.solver.certificate) {
    const CWCertificate cert = cw_certificate(op, cfg.solver.cw_tol);
    j["certificate"] = {{"method", to_string(SpectralMethod::cw_certificate)},
                        {"lower", jnum(cert.lower)},
                        {"upper", jnum(cert.upper)},
                        {"gap", jnum(cert.gap)},
                        {"iterations", cert.iterations}};
  }
  write_json(out_path(cfg, "report.json"), j);
  log << "s(L) = " << fmt17(sr.bound) << "\n";
  return kExitOk;
}

inline int cmd_r0(const RunConfig& cfg, std::ostream& log) {
  const auto problem = weighted_problem(cfg);
  if (!problem) throw ConfigError("/system", "r0 needs A and F");
  const Mu0Options opt = mu0_options(cfg);
  const R0Report rep = r0_report(*problem, opt);
  json j = stamp(cfg, "r0");
  j["report"] = r0_json(rep);
  if (cfg.kind == ProblemKind::sis) {
    const SISParameters& p = *cfg.sis;
    j["sis"] = {{"pointwise_lower_bound", jnum(pointwise_lower_bound(p))},
                {"pointwise_bound_holds", satisfies_pointwise_bound(p, rep.value())},
                {"limit_small_dI", jnum(limit_small_dispersal(p))},
                {"limit_large_dI", jnum(limit_large_dispersal(p))},
                {"limit_large_K", jnum(limit_large_population(p))}};
    if (!zero_set(p.m_sat).empty()) {
      const auto b = degenerate_sandwich(p);
      j["sis"]["sandwich"] = {{"lower", jnum(b.lower)}, {"upper", jnum(b.upper)}};
    }
  }
  write_json(out_path(cfg, "report.json"), j);
  log << "R0 = " << fmt17(rep.value()) << (rep.flagged ? " (routes disagree)" : "") << "\n";
  return kExitOk;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  if (cfg.kind != ProblemKind::sis) throw ConfigError("/problem", "sweep needs an SIS problem");
  if (cfg.sweeps.empty()) throw ConfigError("/sweeps", "no sweeps configured");
  const SISParameters& p = *cfg.sis;
  SweepOptions so;
  so.threads = cfg.threads;
  json summary = stamp(cfg, "sweep");
  summary["sweeps"] = json::array();
  for (const SweepSpec& sw : cfg.sweeps) {
    const LimitReport lr = sw.parameter == "d_I" ? limit_dI(p, sw.values, so) : limit_K(p, sw.values, so);
    std::string csv = csv_header(cfg);
    csv += sw.parameter + ",R0,target_small,target_large,sandwich_lower,sandwich_upper\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const SweepPoint& pt : lr.points)
      csv += csv_row({pt.parameter, pt.r0, lr.target_small, lr.target_large,
                      lr.bounds ? lr.bounds->lower : nan, lr.bounds ? lr.bounds->upper : nan});
    const std::string name = "sweep_" + sw.parameter + ".csv";
    write_text(out_path(cfg, name), csv);
    json s{{"parameter", sw.parameter},
           {"file", name},
           {"points", lr.points.size()},
           {"target_small", jnum(lr.target_small)},
           {"target_large", jnum(lr.target_large)},
           {"monotone", lr.monotone},
           {"strictly_monotone", lr.strictly_monotone}};
    if (lr.bounds) s["sandwich"] = {{"lower", jnum(lr.bounds->lower)}, {"upper", jnum(lr.bounds->upper)}};
    summary["sweeps"].push_back(s);
    log << name << ": " << lr.points.size() << " points, "
        << (lr.monotone ? "monotone" : "NOT monotone") << "\n";
  }
  write_json(out_path(cfg, "report.json"), summary);
  return kExitOk;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  if (!cfg.simulation) throw ConfigError("/simulate", "missing required key");
  const SimulationSpec& sim = *cfg.simulation;
  const Trajectory tr = run(*cfg.sis, sim.s0, sim.i0, sim.t_end, sim.dt, sim.record_every);
  std::string csv = csv_header(cfg) + "t,int_S,int_I,min_I,max_I,drift\n";
  for (const auto& s : tr.samples) csv += csv_row({s.t, s.integral_s, s.integral_i, s.min_i, s.max_i, s.drift});
  write_text(out_path(cfg, "trajectory.csv"), csv);
  json j = stamp(cfg, "simulate");
  j["trajectory"] = {{"file", "trajectory.csv"},
                     {"samples", tr.samples.size()},
                     {"K", jnum(tr.k)},
                     {"dt", jnum(tr.final_state.dt)},
                     {"max_drift", jnum(tr.max_drift)},
                     {"final_int_I", jnum(tr.samples.back().integral_i)}};
  write_json(out_path(cfg, "report.json"), j);
  log << "t = " << fmt17(tr.final_state.t) << ", int I = " << fmt17(tr.samples.back().integral_i)
      << ", max drift " << fmt17(tr.max_drift) << "\n";
  return kExitOk;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const VerifyReport rep = verify(cfg);
  json j = stamp(cfg, "verify");
  j["checks"] = json::array();
  std::size_t width = 0;
  for (const auto& c : rep.checks) width = std::max(width, c.name.size());
  for (const auto& c : rep.checks) {
    j["checks"].push_back({{"name", c.name}, {"status", to_string(c.status)}, {"detail", c.detail}});
    log << to_string(c.status) << "  " << c.name << std::string(width - c.name.size() + 2, ' ')
        << c.detail << "\n";
  }
  j["ok"] = rep.ok();
  write_json(out_path(cfg, "verify.json"), j);
  return rep.ok() ? kExitOk : kExitError;
}

}  // namespace detail

/// Writes error.json into the output directory. Never throws.
inline void write_error_record(const std::string& out_dir, const std::string& command,
                               const std::string& status, const std::string& message,
                               const std::string& config_hash, std::uint64_t seed) {
  try {
    json j{{"command", command}, {"status", status},  {"message", message},
           {"config_hash", config_hash}, {"seed", seed}};
    detail::write_json(std::filesystem::path(out_dir) / "error.json", j);
  } catch (...) {
  }
}

/// Runs one command, mapping refusals to exit 2 and other failures to exit 1.
inline int dispatch(const std::string& command, const RunConfig& cfg, std::ostream& log = std::cout,
                    std::ostream& err = std::cerr) {
  try {
    if (command == "spectral") return detail::cmd_spectral(cfg, log);
    if (command == "r0") return detail::cmd_r0(cfg, log);
    if (command == "sweep") return detail::cmd_sweep(cfg, log);
    if (command == "simulate") return detail::cmd_simulate(cfg, log);
    if (command == "verify") return detail::cmd_verify(cfg, log);
    throw InvalidArgument("unknown command '" + command + "'");
  } catch (const Refusal& e) {
    err << "refused: " << e.what() << "\n";
    write_error_record(cfg.out_dir, command, "refused", e.what(), cfg.config_hash, cfg.seed);
    return kExitRefused;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    write_error_record(cfg.out_dir, command, "error", e.what(), cfg.config_hash, cfg.seed);
    return kExitError;
  }
}

}  // namespace nld::cli

#endif  // NLD_CLI_DISPATCH_HPP
