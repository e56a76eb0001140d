#ifndef NLD_WEIGHTED_PROBLEM_HPP
#define NLD_WEIGHTED_PROBLEM_HPP

// The parametrized family L_mu = L_inf + (1/mu) F and its next-generation
// matrix Q = -F L_inf^{-1}.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nld/assembly.hpp"
#include "nld/coefficients.hpp"
#include "nld/error.hpp"
#include "nld/spectral.hpp"

namespace nld {

/// L_inf (dispersal + A) together with the nonnegative infection field F.
/// The dispersal part is assembled once and reused for every mu.
class WeightedProblem {
 public:
  WeightedProblem(const SpatialGrid& grid, const std::vector<Kernel>& kernels,
                  const std::vector<double>& dispersal, const CoefficientField& a_field,
                  const CoefficientField& f_field, bool neumann = false)
      : a_(a_field), f_(f_field) {
    detail::check_weighted_inputs(a_field, f_field);
    l_inf_ = assemble_operator(grid, kernels, dispersal, a_field, neumann);
    f_block_ = reaction_block(f_field);
  }

  const AssembledOperator& l_infinity() const { return l_inf_; }
  const CoefficientField& a_field() const { return a_; }
  const CoefficientField& f_field() const { return f_; }
  const Eigen::MatrixXd& f_block() const { return f_block_; }
  const SpatialGrid& grid() const { return l_inf_.grid; }
  Eigen::Index size() const { return l_inf_.size(); }

  bool infection_vanishes() const { return !f_.not_identically_zero(); }

  /// Both L_inf and F symmetric, so the weighted problem is self-adjoint.
  bool self_adjoint(double tol = 1e-10) const {
    return l_inf_.asymmetry() <= tol && (f_block_ - f_block_.transpose()).cwiseAbs().maxCoeff() <= tol;
  }

  /// L_mu for 0 < mu <= +inf.
  AssembledOperator at(double mu) const {
    detail::check_mu(mu);
    if (std::isinf(mu)) return l_inf_;
    AssembledOperator op = l_inf_;
    op.matrix.noalias() += f_block_ / mu;
    op.reaction = a_ + f_.scaled(1.0 / mu);
    op.shift_c = metzler_shift(op.matrix);
    return op;
  }

 private:
  CoefficientField a_;
  CoefficientField f_;
  AssembledOperator l_inf_;
  Eigen::MatrixXd f_block_;
};

struct NextGeneration {
  Eigen::MatrixXd q;
  /// s(L_inf), verified negative.
  double s_infinity = 0.0;
  /// Entries in [-1e-10, 0) set to zero.
  int clamped = 0;
  double most_negative = 0.0;
  double rcond = 0.0;
};

inline constexpr double kNegativeClampLimit = 1e-10;

/// Q = -F L_inf^{-1}, computed from an LU factorization of L_inf^T and m n
/// right-hand sides. Refuses when s(L_inf) >= 0.
inline NextGeneration assemble_next_generation(const WeightedProblem& problem,
                                               double tol = kDefaultTolerance,
                                               long max_iter = kDefaultMaxIter) {
  NextGeneration ng;
  ng.s_infinity = spectral_bound(problem.l_infinity(), tol, max_iter).bound;
  if (!(ng.s_infinity < 0.0))
    throw Refusal("next-generation undefined: s(L_inf) = " + std::to_string(ng.s_infinity) +
                  " is not negative");
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(problem.l_infinity().matrix.transpose());
  ng.rcond = lu.rcond();
  if (!(ng.rcond > 1e-14)) throw NumericalFailure("singular solve: L_inf is numerically singular");
  // Q^T = -L_inf^{-T} F^T
  const Eigen::MatrixXd qt = lu.solve(-problem.f_block().transpose());
  ng.q = qt.transpose();
  for (Eigen::Index r = 0; r < ng.q.rows(); ++r) {
    for (Eigen::Index c = 0; c < ng.q.cols(); ++c) {
      double& v = ng.q(r, c);
      if (v < 0.0) {
        ng.most_negative = std::min(ng.most_negative, v);
        if (v < -kNegativeClampLimit)
          throw NumericalFailure("next-generation matrix has a negative entry " + std::to_string(v));
        v = 0.0;
        ++ng.clamped;
      }
    }
  }
  return ng;
}

inline NextGeneration assemble_next_generation(const SpatialGrid& grid,
                                               const std::vector<Kernel>& kernels,
                                               const std::vector<double>& dispersal,
                                               const CoefficientField& a_field,
                                               const CoefficientField& f_field) {
  return assemble_next_generation(WeightedProblem(grid, kernels, dispersal, a_field, f_field));
}

}  // namespace nld

#endif  // NLD_WEIGHTED_PROBLEM_HPP
