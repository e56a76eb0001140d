#ifndef NLD_PERRON_HPP
#define NLD_PERRON_HPP

// Power iteration for the Perron root of an entrywise nonnegative matrix.
// Every spectral quantity in the library reduces to this: s(L) = r(cI + L) - c
// for Metzler L, and r(Q) for the nonnegative next-generation matrix.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "nld/error.hpp"

namespace nld {

struct PowerIterationOptions {
  double tol = 1e-12;
  long max_iter = 100000;
  /// Start vector; all-ones when empty. Must be entrywise nonnegative and nonzero.
  std::optional<Eigen::VectorXd> start;
};

struct PerronResult {
  double root = 0.0;
  /// Max-norm normalized nonnegative eigenvector estimate.
  Eigen::VectorXd vector;
  /// Collatz-Wielandt bounds min/max (Bv)_i / v_i from the last iterate;
  /// -inf/+inf when some v_i vanishes.
  double cw_lower = -std::numeric_limits<double>::infinity();
  double cw_upper = std::numeric_limits<double>::infinity();
  long iterations = 0;
  /// Converged on the Collatz-Wielandt gap rather than on iterate stagnation.
  bool certified = false;
};

namespace detail {

struct CwBounds {
  double lower;
  double upper;
};

inline CwBounds cw_bounds(const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) {
      const double r = w[i] / v[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    } else if (w[i] > 0.0) {
      hi = std::numeric_limits<double>::infinity();
    } else {
      lo = -std::numeric_limits<double>::infinity();
    }
  }
  return {lo, hi};
}

}  // namespace detail

/// Perron root r(B) of a square nonnegative matrix by power iteration.
///
/// Iterates v <- Bv / |Bv|_inf. Stops when the Collatz-Wielandt gap
/// max_i (Bv)_i/v_i - min_i (Bv)_i/v_i drops below tol * max(1, r), or, for
/// iterates with vanishing entries (reducible B), when both the ratio and the
/// iterate change by less than tol. After max_iter iterations a further 100
/// iterations average the ratio; if that average is still unsettled the call
/// throws NumericalFailure.
inline PerronResult perron_root(const Eigen::MatrixXd& b, const PowerIterationOptions& opt = {}) {
  const Eigen::Index n = b.rows();
  if (n == 0 || b.cols() != n) throw InvalidArgument("perron_root needs a nonempty square matrix");
  if (b.minCoeff() < 0.0) throw InvalidArgument("perron_root needs a nonnegative matrix");

  PerronResult res;
  Eigen::VectorXd v = opt.start ? *opt.start : Eigen::VectorXd::Ones(n);
  if (v.size() != n || v.minCoeff() < 0.0 || v.maxCoeff() <= 0.0)
    throw InvalidArgument("power iteration start vector must be nonnegative and nonzero");
  v /= v.maxCoeff();

  if (b.maxCoeff() == 0.0) {
    res.vector = v;
    res.cw_lower = res.cw_upper = 0.0;
    res.certified = true;
    return res;
  }

  constexpr double kPositivityFloor = 1e-8;
  double lam_prev = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd w(n);
  for (long it = 1; it <= opt.max_iter; ++it) {
    w.noalias() = b * v;
    const double lam = w.maxCoeff();
    res.iterations = it;
    if (lam <= 0.0) {
      // B v = 0 for a nonnegative start: v lies in the kernel, r(B) is attained
      // only on other vectors. Restart from all-ones if we did not already.
      if (opt.start) {
        PowerIterationOptions o = opt;
        o.start.reset();
        return perron_root(b, o);
      }
      res.root = 0.0;
      res.vector = v;
      res.cw_lower = res.cw_upper = 0.0;
      return res;
    }
    const auto cw = detail::cw_bounds(v, w);
    const double scale = std::max(1.0, std::abs(lam));
    Eigen::VectorXd next = w / lam;
    const double delta = (next - v).lpNorm<Eigen::Infinity>();
    const bool certified = cw.upper - cw.lower <= opt.tol * scale;
    const bool stagnant = delta <= 8.0 * std::numeric_limits<double>::epsilon();
    const bool ratio_settled = v.minCoeff() < kPositivityFloor && delta <= opt.tol &&
                               std::abs(lam - lam_prev) <= opt.tol * scale;
    if (certified || stagnant || ratio_settled) {
      res.root = lam;
      res.vector = std::move(next);
      res.cw_lower = cw.lower;
      res.cw_upper = cw.upper;
      res.certified = certified;
      return res;
    }
    lam_prev = lam;
    v = std::move(next);
  }

  // Fallback: average the ratio over 100 more iterations.
  double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int k = 0; k < 100; ++k) {
    w.noalias() = b * v;
    const double lam = w.maxCoeff();
    sum += lam;
    lo = std::min(lo, lam);
    hi = std::max(hi, lam);
    v = w / lam;
  }
  const double avg = sum / 100.0;
  if (hi - lo > std::sqrt(opt.tol) * std::max(1.0, std::abs(avg)))
    throw NumericalFailure("power iteration failed to converge after " +
                           std::to_string(opt.max_iter) + " iterations");
  w.noalias() = b * v;
  const auto cw = detail::cw_bounds(v, w);
  res.root = avg;
  res.vector = v;
  res.cw_lower = cw.lower;
  res.cw_upper = cw.upper;
  res.iterations = opt.max_iter + 100;
  return res;
}

/// Smallest c >= 0 with c I + A entrywise nonnegative on the diagonal, plus one.
inline double metzler_shift(const Eigen::MatrixXd& a) {
  return std::max(0.0, -a.diagonal().minCoeff()) + 1.0;
}

/// s(A) = max Re sigma(A) of a cooperative (Metzler) matrix, via r(cI + A) - c.
inline double metzler_spectral_bound(const Eigen::MatrixXd& a, const PowerIterationOptions& opt = {}) {
  const double c = metzler_shift(a);
  Eigen::MatrixXd b = a;
  b.diagonal().array() += c;
  if (b.minCoeff() < 0.0) throw InvalidArgument("matrix is not cooperative (Metzler)");
  return perron_root(b, opt).root - c;
}

}  // namespace nld

#endif  // NLD_PERRON_HPP
