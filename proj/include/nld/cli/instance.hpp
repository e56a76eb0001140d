#ifndef NLD_CLI_INSTANCE_HPP
#define NLD_CLI_INSTANCE_HPP

// Turns a parsed RunConfig into the operators and weighted problems the
// commands work on.

#include <limits>
#include <optional>

#include "nld/assembly.hpp"
#include "nld/cli/config.hpp"
#include "nld/sis.hpp"
#include "nld/weighted_problem.hpp"

namespace nld::cli {

/// Operator for `spectral`: the SIS operator at mu (default 1, the linearization
/// at (K, 0)), L for a system with M, or L_mu (default L_inf) for a system with A, F.
inline AssembledOperator spectral_operator(const RunConfig& cfg) {
  if (cfg.kind == ProblemKind::sis) {
    const SISParameters& p = *cfg.sis;
    return assemble_sis(p.grid, p.kernel, p.d_i, p.beta, p.gamma, p.m_sat, p.k, cfg.mu.value_or(1.0));
  }
  if (cfg.m_field) return assemble_L(cfg.grid, cfg.kernels, cfg.dispersal, *cfg.m_field);
  const WeightedProblem wp(cfg.grid, cfg.kernels, cfg.dispersal, *cfg.a_field, *cfg.f_field);
  return wp.at(cfg.mu.value_or(std::numeric_limits<double>::infinity()));
}

/// The weighted problem L_inf + F / mu, when the config defines one.
inline std::optional<WeightedProblem> weighted_problem(const RunConfig& cfg) {
  if (cfg.kind == ProblemKind::sis) return sis_problem(*cfg.sis);
  if (cfg.a_field) return WeightedProblem(cfg.grid, cfg.kernels, cfg.dispersal, *cfg.a_field, *cfg.f_field);
  return std::nullopt;
}

inline Mu0Options mu0_options(const RunConfig& cfg) {
  Mu0Options o = cfg.kind == ProblemKind::sis ? sis_options(*cfg.sis, cfg.solver.tol) : Mu0Options{};
  o.tol = cfg.solver.tol;
  o.spectral_tol = std::min(o.spectral_tol, cfg.solver.spectral_tol);
  o.max_iter = cfg.solver.max_iter;
  return o;
}

}  // namespace nld::cli

#endif  // NLD_CLI_INSTANCE_HPP
