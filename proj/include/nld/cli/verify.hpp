#ifndef NLD_CLI_VERIFY_HPP
#define NLD_CLI_VERIFY_HPP

// Invariant suite run by `nld verify`. Each check reports pass, fail, or skip;
// a skip records that a hypothesis is absent (the check does not apply).

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "nld/cli/config.hpp"
#include "nld/cli/instance.hpp"
#include "nld/simulator.hpp"
#include "nld/spectral.hpp"
#include "nld/variational.hpp"

namespace nld::cli {

enum class CheckStatus { pass, fail, skip };

inline std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "PASS";
    case CheckStatus::fail: return "FAIL";
    case CheckStatus::skip: return "SKIP";
  }
  return "?";
}

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool ok() const {
    return std::none_of(checks.begin(), checks.end(),
                        [](const CheckResult& c) { return c.status == CheckStatus::fail; });
  }
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Positive test vector with entries in [0.1, 1.1).
inline Eigen::VectorXd random_positive(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.1, 1.1);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline Eigen::VectorXd random_signed(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

class Runner {
 public:
  explicit Runner(VerifyReport& rep) : rep_(rep) {}

  /// Runs body; exceptions become failures, refusals become skips.
  void operator()(const std::string& name, const std::function<CheckResult()>& body) {
    CheckResult r;
    try {
      r = body();
    } catch (const Refusal& e) {
      r.status = CheckStatus::skip;
      r.detail = std::string("refused: ") + e.what();
    } catch (const std::exception& e) {
      r.status = CheckStatus::fail;
      r.detail = std::string("error: ") + e.what();
    }
    r.name = name;
    rep_.checks.push_back(std::move(r));
  }

 private:
  VerifyReport& rep_;
};

inline CheckResult verdict(bool ok, std::string detail) {
  return {"", ok ? CheckStatus::pass : CheckStatus::fail, std::move(detail)};
}

inline CheckResult skipped(std::string why) { return {"", CheckStatus::skip, std::move(why)}; }

inline bool cw_applicable(const AssembledOperator& op) {
  try {
    require_cw_hypotheses(op);
    return true;
  } catch (const Refusal&) {
    return false;
  }
}

}  // namespace detail

/// Runs every check that applies to the configured problem.
inline VerifyReport verify(const RunConfig& cfg) {
  VerifyReport rep;
  detail::Runner check(rep);
  std::mt19937_64 rng(cfg.seed);
  const double stol = cfg.solver.spectral_tol;
  const long iters = cfg.solver.max_iter;

  const AssembledOperator op = spectral_operator(cfg);
  const SpectralReport sb = spectral_bound(op, stol, iters);

  check("metzler", [&] {
    return detail::verdict(op.metzler(), "min off-diagonal " + detail::num(op.min_off_diagonal()));
  });

  check("perron-positivity", [&] {
    const double lo = sb.principal_vector->minCoeff() / sb.principal_vector->maxCoeff();
    if (!detail::cw_applicable(op)) return detail::skipped("operator not irreducible");
    return detail::verdict(lo > 1e-14, "min normalized entry " + detail::num(lo));
  });

  check("bound-above-essential", [&] {
    return detail::verdict(sb.bound >= sb.essential_bound - 1e-10,
                           "s = " + detail::num(sb.bound) + ", essential " +
                               detail::num(sb.essential_bound));
  });

  check("cw-sandwich", [&] {
    if (!detail::cw_applicable(op)) return detail::skipped("CW hypotheses fail");
    for (int t = 0; t < 100; ++t) {
      const auto r = cw_ratios(op, detail::random_positive(rng, op.size()));
      const double slack = 1e-10 * std::max(1.0, std::abs(sb.bound));
      if (r.lower > sb.bound + slack || r.upper < sb.bound - slack)
        return detail::verdict(false, "trial " + std::to_string(t) + ": [" + detail::num(r.lower) +
                                          ", " + detail::num(r.upper) + "] misses " +
                                          detail::num(sb.bound));
    }
    return detail::verdict(true, "100 random vectors bracket s = " + detail::num(sb.bound));
  });

  check("cw-certificate", [&] {
    if (!cfg.solver.certificate) return detail::skipped("disabled in config");
    const auto cert = cw_certificate(op, cfg.solver.cw_tol);
    const double slack = 1e-12 * std::max(1.0, std::abs(sb.bound));
    bool monotone = true;
    for (std::size_t k = 1; k < cert.gap_history.size(); ++k)
      monotone = monotone && cert.gap_history[k] <= cert.gap_history[k - 1] * (1.0 + 1e-12) + 1e-15;
    const bool ok = cert.gap <= cfg.solver.cw_tol && cert.lower <= sb.bound + slack &&
                    sb.bound <= cert.upper + slack && monotone;
    return detail::verdict(ok, "gap " + detail::num(cert.gap) + ", [" + detail::num(cert.lower) +
                                   ", " + detail::num(cert.upper) + "]" +
                                   (monotone ? "" : ", gap not monotone"));
  });

  check("rayleigh-equality", [&] {
    if (op.asymmetry() > 1e-10) return detail::skipped("operator not symmetric");
    const auto rb = rayleigh_bound(op, stol, iters);
    double worst = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < 100; ++t)
      worst = std::max(worst, rayleigh_quotient(op, detail::random_signed(rng, op.size())));
    const double diff = std::abs(rb.bound - sb.bound);
    return detail::verdict(diff <= 1e-8 && worst <= rb.bound + 1e-10,
                           "|rayleigh - power| = " + detail::num(diff) + ", max random quotient " +
                               detail::num(worst));
  });

  check("epsilon-sandwich", [&] {
    std::vector<double> eps = cfg.solver.eps;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    double prev = -std::numeric_limits<double>::infinity();
    const double slack = 1e-10 * std::max(1.0, std::abs(sb.bound));
    for (double e : eps) {
      const double se = spectral_bound(assemble_epsilon_approx(op, op.reaction, e), stol, iters).bound;
      if (!(se <= sb.bound + slack && sb.bound <= se + 2.0 * e + slack && se >= prev - slack))
        return detail::verdict(false, "eps " + detail::num(e) + ": s(L^eps) = " + detail::num(se));
      prev = se;
    }
    return detail::verdict(true, std::to_string(eps.size()) + " eps values");
  });

  const auto problem = weighted_problem(cfg);
  if (problem) {
    const Mu0Options opt = mu0_options(cfg);
    const double s_inf = spectral_bound(problem->l_infinity(), opt.spectral_tol, opt.max_iter).bound;
    const bool mu0_defined = s_inf < 0.0 && !problem->infection_vanishes();

    check("next-generation-nonnegative", [&] {
      if (!(s_inf < 0.0)) return detail::skipped("s(L_inf) >= 0");
      const auto ng = assemble_next_generation(*problem, opt.spectral_tol, opt.max_iter);
      return detail::verdict(ng.q.minCoeff() >= 0.0,
                             std::to_string(ng.clamped) + " entries clamped, most negative " +
                                 detail::num(ng.most_negative));
    });

    double r0 = std::numeric_limits<double>::quiet_NaN();
    check("route-agreement", [&] {
      if (!mu0_defined) return detail::skipped("no mu0");
      const R0Report rr = r0_report(*problem, opt);
      r0 = rr.value();
      double ray = 0.0;
      if (rr.mu0_rayleigh) ray = std::abs(*rr.mu0_rayleigh - rr.mu0_next_generation);
      const double bis = std::abs(rr.mu0_bisection - rr.mu0_next_generation);
      bool bracket = true;
      if (!std::isnan(rr.cw_lower))
        bracket = rr.cw_lower <= rr.mu0_bisection * (1 + 1e-9) &&
                  rr.mu0_bisection <= rr.cw_upper * (1 + 1e-9);
      return detail::verdict(bis <= 1e-6 && ray <= 1e-8 && bracket,
                             "R0 = " + detail::num(r0) + ", |bisection - ng| = " + detail::num(bis) +
                                 (rr.mu0_rayleigh ? ", |rayleigh - ng| = " + detail::num(ray) : "") +
                                 (bracket ? "" : ", CW bracket violated"));
    });

    check("sign-relation", [&] {
      if (!mu0_defined || std::isnan(r0)) return detail::skipped("no mu0");
      std::vector<double> mus;
      for (int k = 0; k < 10; ++k) mus.push_back(r0 * std::pow(10.0, -1.0 + 2.0 * k / 9.0));
      const auto sr = sign_relation_check(*problem, mus, opt);
      return detail::verdict(sr.all_agree, std::to_string(mus.size()) + " samples");
    });

    check("monotone-in-mu", [&] {
      if (problem->infection_vanishes()) return detail::skipped("F vanishes");
      const double centre = std::isnan(r0) ? 1.0 : r0;
      double prev = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= 12; ++k) {
        const double mu = centre * std::pow(10.0, -2.0 + 4.0 * k / 12.0);
        const double s = spectral_bound(problem->at(mu), opt.spectral_tol, opt.max_iter).bound;
        if (s > prev + 1e-10 * std::max(1.0, std::abs(prev)))
          return detail::verdict(false, "increase at mu = " + detail::num(mu));
        prev = s;
      }
      return detail::verdict(true, "13 log-spaced mu");
    });

    if (cfg.kind == ProblemKind::sis) {
      const SISParameters& p = *cfg.sis;
      check("pointwise-lower-bound", [&] {
        if (std::isnan(r0)) return detail::skipped("R0 unavailable");
        return detail::verdict(satisfies_pointwise_bound(p, r0),
                               "R0 = " + detail::num(r0) + " >= " + detail::num(pointwise_lower_bound(p)));
      });
      check("alpha-bound", [&] {
        const double a = compute_alpha(p.grid, p.kernel);
        const double mass = kernel_row_masses(p.grid, p.kernel).minCoeff();
        return detail::verdict(a > 0.0 && a <= mass + 1e-10,
                               "alpha = " + detail::num(a) + ", min row mass " + detail::num(mass));
      });
      check("degenerate-sandwich", [&] {
        if (zero_set(p.m_sat).empty()) return detail::skipped("m has no zeros");
        const auto b = degenerate_sandwich(p);
        return detail::verdict(b.lower <= b.upper * (1 + 1e-12),
                               "[" + detail::num(b.lower) + ", " + detail::num(b.upper) + "]");
      });
      for (const SweepSpec& sw : cfg.sweeps) {
        check("sweep-monotone-" + sw.parameter, [&] {
          SweepOptions so;
          so.threads = cfg.threads;
          const LimitReport lr = sw.parameter == "d_I" ? limit_dI(p, sw.values, so) : limit_K(p, sw.values, so);
          return detail::verdict(lr.monotone, std::to_string(lr.points.size()) + " points");
        });
      }
      if (cfg.simulation) {
        check("simulation-conservation", [&] {
          const auto& sim = *cfg.simulation;
          const Trajectory tr = run(p, sim.s0, sim.i0, sim.t_end, sim.dt, sim.record_every);
          const double lo = std::min(tr.final_state.s.minCoeff(), tr.final_state.i.minCoeff());
          return detail::verdict(tr.max_drift <= 1e-8 && lo >= 0.0,
                                 "max drift " + detail::num(tr.max_drift));
        });
      }
    }
  }
  return rep;
}

}  // namespace nld::cli

#endif  // NLD_CLI_VERIFY_HPP
