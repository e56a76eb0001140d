#ifndef NLD_VARIATIONAL_HPP
#define NLD_VARIATIONAL_HPP

// Collatz-Wielandt bounds for s(L) and the three independent routes to the
// weighted eigenvalue mu0 (the unique mu with s(L_mu) = 0):
//   * bisection on the sign of s(L_mu),
//   * the spectral radius of the next-generation matrix,
//   * the generalized Rayleigh quotient sup phi^T F phi / (-phi^T L_inf phi)
//     for self-adjoint problems.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nld/assembly.hpp"
#include "nld/error.hpp"
#include "nld/perron.hpp"
#include "nld/spectral.hpp"
#include "nld/weighted_problem.hpp"

namespace nld {

struct CwRatios {
  double lower;
  double upper;
};

/// min_i and max_i of (L phi)_i / phi_i over all m n discrete indices.
inline CwRatios cw_ratios(const AssembledOperator& op, const Eigen::VectorXd& phi) {
  if (phi.size() != op.size()) throw InvalidArgument("test vector has the wrong length");
  if (!(phi.minCoeff() > 0.0)) throw InvalidArgument("CW test vector must be entrywise positive");
  const Eigen::VectorXd r = (op.matrix * phi).cwiseQuotient(phi);
  return {r.minCoeff(), r.maxCoeff()};
}

struct CWCertificate {
  Eigen::VectorXd phi;
  double lower = 0.0;
  double upper = 0.0;
  double gap = 0.0;
  long iterations = 0;
  std::vector<double> gap_history;
};

/// Checks the irreducibility hypotheses under which the Collatz-Wielandt
/// characterization of s(L) holds: weak irreducibility of M, strengthened to
/// pointwise irreducibility when some species does not disperse.
inline void require_cw_hypotheses(const AssembledOperator& op) {
  if (!op.reaction.cooperative())
    throw Refusal("CW characterization needs a cooperative reaction field");
  if (!op.reaction.weakly_irreducible())
    throw Refusal(
        "CW characterization not guaranteed: reaction field is not weakly irreducible "
        "(e.g. M = diag(2, 1) gives different inf-sup and sup-inf values)");
  if (op.any_degenerate_species() && !op.reaction.strongly_irreducible())
    throw Refusal(
        "CW characterization not guaranteed: some d_i = 0 and the reaction field is not "
        "irreducible at every node");
}

/// Iterates phi <- (shift_c I + L) phi / |.|_inf from phi = 1 until the
/// Collatz-Wielandt gap is at most tol; the result brackets s(L).
inline CWCertificate cw_certificate(const AssembledOperator& op, double tol = 1e-10,
                                    long max_iter = kDefaultMaxIter) {
  require_cw_hypotheses(op);
  if (!(tol > 0.0)) throw InvalidArgument("certificate tolerance must be positive");
  Eigen::MatrixXd b = op.matrix;
  b.diagonal().array() += op.shift_c;
  CWCertificate cert;
  Eigen::VectorXd phi = Eigen::VectorXd::Ones(op.size());
  for (long it = 0; it <= max_iter; ++it) {
    const Eigen::VectorXd bphi = b * phi;
    const Eigen::VectorXd r = bphi.cwiseQuotient(phi);
    cert.lower = r.minCoeff() - op.shift_c;
    cert.upper = r.maxCoeff() - op.shift_c;
    cert.gap = cert.upper - cert.lower;
    cert.gap_history.push_back(cert.gap);
    cert.iterations = it;
    if (cert.gap <= tol) {
      cert.phi = phi;
      return cert;
    }
    phi = bphi / bphi.maxCoeff();
    if (!(phi.minCoeff() > 0.0))
      throw NumericalFailure("CW iterate lost strict positivity (operator not irreducible)");
  }
  throw NumericalFailure("CW certificate did not reach gap " + std::to_string(tol));
}

struct Mu0Options {
  /// Relative bracket width for bisection.
  double tol = 1e-10;
  /// Power-iteration tolerance for every spectral bound evaluation.
  double spectral_tol = kDefaultTolerance;
  long max_iter = kDefaultMaxIter;
};

namespace detail {

inline void require_negative_l_infinity(const WeightedProblem& p, const Mu0Options& o,
                                        const char* what) {
  const double s = spectral_bound(p.l_infinity(), o.spectral_tol, o.max_iter).bound;
  if (!(s < 0.0))
    throw Refusal(std::string(what) + ": s(L_inf) = " + std::to_string(s) + " is not negative");
}

}  // namespace detail

struct BisectionResult {
  double mu0 = 0.0;
  /// s(L_mu0) at the returned midpoint.
  double s_at_mu0 = 0.0;
  int evaluations = 0;
};

/// mu0 by bisection on mu -> s(L_mu), which is nonincreasing and tends to
/// +inf as mu -> 0+. The bracket starts at mu = 1 and is doubled or halved
/// until the sign changes.
inline BisectionResult mu0_bisection(const WeightedProblem& problem, const Mu0Options& opt = {}) {
  if (problem.infection_vanishes())
    throw Refusal("no mu0 exists: F is identically zero, so s(L_mu) = s(L_inf) for all mu");
  detail::require_negative_l_infinity(problem, opt, "no mu0 exists");

  BisectionResult res;
  std::optional<Eigen::VectorXd> warm;
  auto s_of = [&](double mu) {
    const auto rep = spectral_bound(problem.at(mu), opt.spectral_tol, opt.max_iter, warm);
    warm = rep.principal_vector;
    ++res.evaluations;
    return rep.bound;
  };

  constexpr double kRange = 1152921504606846976.0;  // 2^60
  double lo = 1.0, hi = 1.0;
  double s = s_of(1.0);
  if (s == 0.0) {
    res.mu0 = 1.0;
    return res;
  }
  if (s > 0.0) {
    while (s > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > kRange) throw NumericalFailure("mu0 out of range (above 2^60)");
      s = s_of(hi);
    }
  } else {
    while (s <= 0.0) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1.0 / kRange) throw NumericalFailure("mu0 out of range (below 2^-60)");
      s = s_of(lo);
    }
  }
  // Invariant: s(lo) > 0 >= s(hi).
  while (hi - lo > opt.tol * 0.5 * (hi + lo)) {
    const double mid = 0.5 * (lo + hi);
    if (s_of(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  res.mu0 = 0.5 * (lo + hi);
  res.s_at_mu0 = s_of(res.mu0);
  return res;
}

struct NextGenerationResult {
  double mu0 = 0.0;
  /// Perron vector of Q.
  Eigen::VectorXd q_vector;
  /// phi = (-L_inf)^{-1} q_vector, the eigenfunction of F phi = mu0 (-L_inf) phi.
  Eigen::VectorXd eigenfunction;
  int clamped = 0;
};

/// mu0 = r(-F L_inf^{-1}).
inline NextGenerationResult mu0_next_generation(const WeightedProblem& problem,
                                                const Mu0Options& opt = {}) {
  const NextGeneration ng = assemble_next_generation(problem, opt.spectral_tol, opt.max_iter);
  NextGenerationResult res;
  res.clamped = ng.clamped;
  const PerronResult pr = spectral_radius_pair(ng.q, opt.spectral_tol, opt.max_iter);
  res.mu0 = pr.root;
  res.q_vector = pr.vector;
  Eigen::VectorXd phi = (-problem.l_infinity().matrix).partialPivLu().solve(pr.vector);
  phi /= phi.maxCoeff();
  res.eigenfunction = phi;
  return res;
}

/// phi^T W F phi / (-phi^T W L_inf phi) in the grid-weighted inner product.
inline double generalized_rayleigh_quotient(const WeightedProblem& problem,
                                            const Eigen::VectorXd& phi) {
  if (phi.size() != problem.size()) throw InvalidArgument("test vector has the wrong length");
  const Eigen::VectorXd w = detail::species_weights(problem.l_infinity());
  const Eigen::ArrayXd wphi = w.array() * phi.array();
  const double num = (wphi * (problem.f_block() * phi).array()).sum();
  const double den = -(wphi * (problem.l_infinity().matrix * phi).array()).sum();
  if (!(den > 0.0)) throw InvalidArgument("test vector makes the dispersal-recovery form nonpositive");
  return num / den;
}

/// mu0 as the maximum of the generalized Rayleigh quotient. With -L_inf = R R^T
/// (Cholesky), this is the largest eigenvalue of R^{-1} F R^{-T}. Refuses
/// problems that are not self-adjoint.
inline double mu0_rayleigh(const WeightedProblem& problem, const Mu0Options& opt = {}) {
  if (!problem.self_adjoint()) throw Refusal("Rayleigh route needs a self-adjoint problem");
  detail::require_negative_l_infinity(problem, opt, "no mu0 exists");
  const Eigen::MatrixXd neg = -0.5 * (problem.l_infinity().matrix +
                                      problem.l_infinity().matrix.transpose());
  const Eigen::LLT<Eigen::MatrixXd> llt(neg);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("-L_inf is not numerically positive definite");
  const Eigen::MatrixXd f = 0.5 * (problem.f_block() + problem.f_block().transpose());
  const auto lower = llt.matrixL();
  const Eigen::MatrixXd y = lower.solve(f);
  Eigen::MatrixXd c = lower.solve(y.transpose());
  c = 0.5 * (c + c.transpose()).eval();
  double shift = 0.0;
  for (Eigen::Index r = 0; r < c.rows(); ++r)
    shift = std::max(shift, c.row(r).cwiseAbs().sum() - 2.0 * c(r, r));
  c.diagonal().array() += shift;
  if (c.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  return detail::symmetric_power(c, [](Eigen::VectorXd&) {}, opt.spectral_tol, opt.max_iter).value -
         shift;
}

/// Ratios (F phi)_i / (-(L_inf phi)_i); their min and max bracket mu0.
inline CwRatios mu0_cw_ratios(const WeightedProblem& problem, const Eigen::VectorXd& phi) {
  if (phi.size() != problem.size()) throw InvalidArgument("test vector has the wrong length");
  if (!(phi.minCoeff() > 0.0)) throw InvalidArgument("CW test vector must be entrywise positive");
  const Eigen::VectorXd num = problem.f_block() * phi;
  const Eigen::VectorXd den = -(problem.l_infinity().matrix * phi);
  const int n = problem.grid().size();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Eigen::Index i = 0; i < den.size(); ++i) {
    if (!(den[i] > 0.0))
      throw InvalidArgument("test function inadmissible at node " + std::to_string(i % n) +
                            " (species " + std::to_string(i / n + 1) + ")");
    const double r = num[i] / den[i];
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {lo, hi};
}

struct SignSample {
  double mu;
  double s;
  double predicted;  // r(Q)/mu - 1
  int sign_s;
  int sign_predicted;
  bool agree;
};

struct SignReport {
  double spectral_radius = 0.0;
  std::vector<SignSample> samples;
  bool all_agree = true;
};

inline constexpr double kSignDeadZone = 1e-9;

inline int dead_zone_sign(double v) { return v > kSignDeadZone ? 1 : (v < -kSignDeadZone ? -1 : 0); }

/// Compares sign s(L_mu) with sign(r(Q)/mu - 1) at each mu. A sample inside
/// the dead zone on either side counts as agreeing.
inline SignReport sign_relation_check(const WeightedProblem& problem,
                                      const std::vector<double>& mu_samples,
                                      const Mu0Options& opt = {}) {
  SignReport rep;
  rep.spectral_radius = mu0_next_generation(problem, opt).mu0;
  for (double mu : mu_samples) {
    SignSample s;
    s.mu = mu;
    s.s = spectral_bound(problem.at(mu), opt.spectral_tol, opt.max_iter).bound;
    s.predicted = rep.spectral_radius / mu - 1.0;
    s.sign_s = dead_zone_sign(s.s);
    s.sign_predicted = dead_zone_sign(s.predicted);
    s.agree = s.sign_s == s.sign_predicted || s.sign_s == 0 || s.sign_predicted == 0;
    rep.all_agree = rep.all_agree && s.agree;
    rep.samples.push_back(s);
  }
  return rep;
}

struct R0Report {
  double mu0_bisection = std::numeric_limits<double>::quiet_NaN();
  double mu0_next_generation = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> mu0_rayleigh;
  double cw_upper = std::numeric_limits<double>::quiet_NaN();
  double cw_lower = std::numeric_limits<double>::quiet_NaN();
  /// Largest pairwise deviation between the routes that ran.
  double agreement = 0.0;
  double s_at_mu0 = std::numeric_limits<double>::quiet_NaN();
  /// Agreement exceeded the declared tolerance.
  bool flagged = false;
  double tolerance = 1e-5;

  /// The reported value: the next-generation radius.
  double value() const { return mu0_next_generation; }
};

/// Runs every applicable route and packages them with agreement diagnostics.
/// The CW bracket is evaluated at the eigenfunction from the next-generation route.
inline R0Report r0_report(const WeightedProblem& problem, const Mu0Options& opt = {},
                          double agreement_tol = 1e-5) {
  R0Report rep;
  rep.tolerance = agreement_tol;
  const auto ng = mu0_next_generation(problem, opt);
  rep.mu0_next_generation = ng.mu0;
  const auto bis = mu0_bisection(problem, opt);
  rep.mu0_bisection = bis.mu0;
  rep.s_at_mu0 = bis.s_at_mu0;
  if (problem.self_adjoint()) rep.mu0_rayleigh = mu0_rayleigh(problem, opt);
  if (ng.eigenfunction.minCoeff() > 0.0) {
    const auto cw = mu0_cw_ratios(problem, ng.eigenfunction);
    rep.cw_lower = cw.lower;
    rep.cw_upper = cw.upper;
  }
  std::vector<double> v{rep.mu0_bisection, rep.mu0_next_generation};
  if (rep.mu0_rayleigh) v.push_back(*rep.mu0_rayleigh);
  rep.agreement = *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
  rep.flagged = rep.agreement > agreement_tol;
  return rep;
}

}  // namespace nld

#endif  // NLD_VARIATIONAL_HPP
