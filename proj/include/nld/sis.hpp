#ifndef NLD_SIS_HPP
#define NLD_SIS_HPP

// Basic reproduction rate of the nonlocal SIS model with saturated incidence
//
//   S_t = d_S int J (S(y) - S(x)) dy - beta S I / (m + S + I) + gamma I
//   I_t = d_I int J (I(y) - I(x)) dy + beta S I / (m + S + I) - gamma I
//
// linearized at the disease-free state (K, 0), and the parameter limits of R0.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "nld/assembly.hpp"
#include "nld/coefficients.hpp"
#include "nld/domain.hpp"
#include "nld/error.hpp"
#include "nld/spectral.hpp"
#include "nld/variational.hpp"
#include "nld/weighted_problem.hpp"

namespace nld {

struct SISParameters {
  SpatialGrid grid;
  Kernel kernel = Kernel::uniform(1.0);
  /// Carried for the simulator only; R0 does not depend on it.
  double d_s = 1.0;
  double d_i = 1.0;
  ScalarField beta;
  ScalarField gamma;
  ScalarField m_sat;
  /// Mean total population density.
  double k = 1.0;

  void validate() const {
    if (grid.size() == 0) throw InvalidArgument("SIS grid is empty");
    if (kernel.dimension() != grid.dimension())
      throw InvalidArgument("kernel and grid dimensions differ");
    if (!(d_i >= 0.0) || !(d_s >= 0.0)) throw InvalidArgument("dispersal rates must be nonnegative");
    if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("K must be positive");
    for (const ScalarField* f : {&beta, &gamma, &m_sat})
      if (f->size() != grid.size()) throw InvalidArgument("SIS field does not match the grid");
    if (!beta.nonnegative() || !gamma.nonnegative() || !m_sat.nonnegative())
      throw InvalidArgument("beta, gamma and m must be nonnegative");
    if (!beta.not_identically_zero()) throw InvalidArgument("beta must not vanish identically");
    if (!gamma.not_identically_zero()) throw InvalidArgument("gamma must not vanish identically");
  }

  SISParameters with_d_i(double v) const {
    SISParameters p = *this;
    p.d_i = v;
    return p;
  }

  SISParameters with_k(double v) const {
    SISParameters p = *this;
    p.k = v;
    return p;
  }
};

/// Weighted problem with L_inf = Neumann dispersal - gamma and F = K beta / (m + K).
inline WeightedProblem sis_problem(const SISParameters& p) {
  p.validate();
  return WeightedProblem(p.grid, {p.kernel}, {p.d_i},
                         CoefficientField::from_scalar(ScalarField(-p.gamma.samples())),
                         CoefficientField::from_scalar(sis_infection_rate(p.beta, p.m_sat, p.k)),
                         true);
}

/// Same operator with F = beta: the K -> infinity limit problem.
inline WeightedProblem sis_saturation_free_problem(const SISParameters& p) {
  p.validate();
  return WeightedProblem(p.grid, {p.kernel}, {p.d_i},
                         CoefficientField::from_scalar(ScalarField(-p.gamma.samples())),
                         CoefficientField::from_scalar(p.beta), true);
}

inline Mu0Options sis_options(const SISParameters& p, double tol = 1e-10) {
  Mu0Options o;
  o.tol = tol;
  // The principal vector concentrates near the zero set of m as K -> 0.
  if (p.k <= 1e-4) o.spectral_tol = 1e-14;
  return o;
}

/// s(hat L_inf), negative for every valid parameter set.
inline double sis_s_infinity(const SISParameters& p) {
  return spectral_bound(sis_problem(p).l_infinity(), sis_options(p).spectral_tol).bound;
}

/// R0 by bisection, next-generation radius and the Rayleigh quotient.
inline R0Report r0_sis(const SISParameters& params, double tol = 1e-10) {
  const WeightedProblem problem = sis_problem(params);
  const Mu0Options opt = sis_options(params, tol);
  const double s_inf = spectral_bound(problem.l_infinity(), opt.spectral_tol, opt.max_iter).bound;
  if (!(s_inf < 0.0))
    throw NumericalFailure("s(hat L_inf) = " + std::to_string(s_inf) +
                           " is not negative; the discretization is inconsistent");
  return r0_report(problem, opt, 1e-5);
}

/// R0 from the next-generation route only.
inline double r0_value(const SISParameters& params) {
  return mu0_next_generation(sis_problem(params), sis_options(params)).mu0;
}

inline constexpr double kGammaZeroTolerance = 1e-12;

/// lim_{d_I -> 0} R0 = sup over {gamma > 0} of K beta / (gamma (m + K)), taken
/// node-wise; +inf when beta > 0 at a node where gamma vanishes.
inline double limit_small_dispersal(const SISParameters& p) {
  double best = 0.0;
  for (int j = 0; j < p.grid.size(); ++j) {
    const double f = p.k * p.beta[j] / (p.m_sat[j] + p.k);
    if (p.gamma[j] <= kGammaZeroTolerance) {
      if (p.beta[j] > kGammaZeroTolerance) return std::numeric_limits<double>::infinity();
      continue;
    }
    best = std::max(best, f / p.gamma[j]);
  }
  return best;
}

/// lim_{d_I -> inf} R0 = int K beta / (m + K) / int gamma.
inline double limit_large_dispersal(const SISParameters& p) {
  const Eigen::VectorXd& w = p.grid.weights();
  return w.dot(sis_infection_rate(p.beta, p.m_sat, p.k).samples()) / w.dot(p.gamma.samples());
}

/// lim_{K -> inf} R0: the Rayleigh maximum of int beta phi^2 over the
/// dispersal-recovery form.
inline double limit_large_population(const SISParameters& p) {
  return mu0_rayleigh(sis_saturation_free_problem(p));
}

struct DegenerateBounds {
  double lower;
  double upper;
};

/// Bounds on lim_{K -> 0} R0 when m vanishes on Sigma:
///   max_Sigma beta / (d_I int J + gamma) <= lim <= max_Sigma beta / (-s(hat L_inf)).
inline DegenerateBounds degenerate_sandwich(const SISParameters& p) {
  p.validate();
  const auto sigma = zero_set(p.m_sat);
  if (sigma.empty()) throw InvalidArgument("degenerate sandwich needs a nonempty zero set of m");
  const Eigen::VectorXd mass = kernel_row_masses(p.grid, p.kernel);
  const double s_inf = sis_s_infinity(p);
  DegenerateBounds b{0.0, 0.0};
  for (int j : sigma) {
    b.lower = std::max(b.lower, p.beta[j] / (p.d_i * mass[j] + p.gamma[j]));
    b.upper = std::max(b.upper, p.beta[j] / (-s_inf));
  }
  if (b.lower > b.upper * (1.0 + 1e-12))
    throw NumericalFailure("degenerate sandwich inverted: lower exceeds upper");
  return b;
}

/// max_x K beta / ((m + K)(d_I int J + gamma)), a lower bound for R0.
inline double pointwise_lower_bound(const SISParameters& p) {
  const Eigen::VectorXd mass = kernel_row_masses(p.grid, p.kernel);
  double best = 0.0;
  for (int j = 0; j < p.grid.size(); ++j) {
    const double den = (p.m_sat[j] + p.k) * (p.d_i * mass[j] + p.gamma[j]);
    if (den > 0.0) best = std::max(best, p.k * p.beta[j] / den);
  }
  return best;
}

/// Whether the computed r0 respects the pointwise lower bound (relative slack 1e-9).
inline bool satisfies_pointwise_bound(const SISParameters& p, double r0) {
  return r0 >= pointwise_lower_bound(p) * (1.0 - 1e-9);
}

enum class LimitDirection { dispersal, population };

inline std::string to_string(LimitDirection d) {
  return d == LimitDirection::dispersal ? "d_I" : "K";
}

struct SweepPoint {
  double parameter = 0.0;
  double r0 = 0.0;
  std::optional<R0Report> routes;
};

struct LimitReport {
  LimitDirection direction = LimitDirection::dispersal;
  std::vector<SweepPoint> points;
  /// Analytic limit at the small end of the parameter (d_I -> 0 or K -> 0).
  double target_small = 0.0;
  /// Analytic limit at the large end (d_I -> inf or K -> inf).
  double target_large = 0.0;
  /// Sandwich for the K -> 0 limit when m has zeros.
  std::optional<DegenerateBounds> bounds;
  /// R0 nonincreasing in d_I, nondecreasing in K (relative slack 1e-9).
  bool monotone = true;
  /// Strictly increasing in K; only meaningful under positive m.
  bool strictly_monotone = true;
};

/// log-spaced values from lo to hi with per_decade points per decade plus the endpoint.
inline std::vector<double> log_grid(double lo, double hi, int per_decade = 8) {
  if (!(lo > 0.0) || !(hi > lo)) throw InvalidArgument("log grid needs 0 < lo < hi");
  if (per_decade < 1) throw InvalidArgument("log grid needs at least one point per decade");
  const double decades = std::log10(hi / lo);
  const int steps = std::max(1, static_cast<int>(std::lround(decades * per_decade)));
  std::vector<double> v(steps + 1);
  for (int k = 0; k <= steps; ++k) v[k] = lo * std::pow(10.0, decades * k / steps);
  v.back() = hi;
  return v;
}

namespace detail {

// Evaluates f(i) for i in [0, n) on up to `threads` workers; results keep index order.
template <class F>
void parallel_for(int n, int threads, F f) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = next++; i < n; i = next++) f(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline void check_span(const std::vector<double>& g, double decades, const char* name) {
  if (g.size() < 2) throw InvalidArgument(std::string(name) + " grid needs at least two values");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(g[i] > 0.0)) throw InvalidArgument(std::string(name) + " grid values must be positive");
    if (i > 0 && !(g[i] > g[i - 1])) throw InvalidArgument(std::string(name) + " grid must increase");
  }
  if (g.back() / g.front() < std::pow(10.0, decades) * (1.0 - 1e-12))
    throw InvalidArgument(std::string(name) + " grid must span at least " +
                          std::to_string(static_cast<int>(decades)) + " decades");
}

inline void fill_monotonicity(LimitReport& rep, bool increasing) {
  for (std::size_t i = 1; i < rep.points.size(); ++i) {
    const double a = rep.points[i - 1].r0, b = rep.points[i].r0;
    const double slack = 1e-9 * std::max(std::abs(a), std::abs(b));
    if (increasing) {
      if (b < a - slack) rep.monotone = false;
      if (!(b - a > 1e-12)) rep.strictly_monotone = false;
    } else {
      if (b > a + slack) rep.monotone = false;
      if (!(a - b > 1e-12)) rep.strictly_monotone = false;
    }
  }
}

}  // namespace detail

struct SweepOptions {
  int threads = 1;
  /// Run all three routes at every point (slower) instead of the next-generation route only.
  bool all_routes = false;
};

inline SweepPoint sweep_point(const SISParameters& p, double parameter, bool all_routes) {
  SweepPoint pt;
  pt.parameter = parameter;
  if (all_routes) {
    pt.routes = r0_sis(p);
    pt.r0 = pt.routes->value();
  } else {
    pt.r0 = r0_value(p);
  }
  return pt;
}

/// R0 along an increasing d_I grid spanning at least three decades, with the
/// small- and large-dispersal limits.
inline LimitReport limit_dI(const SISParameters& params, const std::vector<double>& d_grid,
                            const SweepOptions& opt = {}) {
  detail::check_span(d_grid, 3.0, "d_I");
  params.validate();
  LimitReport rep;
  rep.direction = LimitDirection::dispersal;
  rep.points.resize(d_grid.size());
  detail::parallel_for(static_cast<int>(d_grid.size()), opt.threads, [&](int i) {
    rep.points[i] = sweep_point(params.with_d_i(d_grid[i]), d_grid[i], opt.all_routes);
  });
  rep.target_small = limit_small_dispersal(params);
  rep.target_large = limit_large_dispersal(params);
  detail::fill_monotonicity(rep, false);
  return rep;
}

/// R0 along an increasing K grid spanning at least four decades. The K -> 0
/// target is 0 for positive m; otherwise the degenerate sandwich is reported
/// and target_small holds its (finite zero set) lower end.
inline LimitReport limit_K(const SISParameters& params, const std::vector<double>& k_grid,
                           const SweepOptions& opt = {}) {
  detail::check_span(k_grid, 4.0, "K");
  params.validate();
  LimitReport rep;
  rep.direction = LimitDirection::population;
  rep.points.resize(k_grid.size());
  detail::parallel_for(static_cast<int>(k_grid.size()), opt.threads, [&](int i) {
    rep.points[i] = sweep_point(params.with_k(k_grid[i]), k_grid[i], opt.all_routes);
  });
  rep.target_large = limit_large_population(params);
  if (zero_set(params.m_sat).empty()) {
    rep.target_small = 0.0;
  } else {
    rep.bounds = degenerate_sandwich(params);
    rep.target_small = rep.bounds->lower;
  }
  detail::fill_monotonicity(rep, true);
  return rep;
}

}  // namespace nld

#endif  // NLD_SIS_HPP
