#ifndef NLD_ASSEMBLY_HPP
#define NLD_ASSEMBLY_HPP

// Dense discretizations of the nonlocal dispersal operators
//
//   [L phi]_i(x) = d_i int_Omega J_i(x - y) phi_i(y) dy (- d_i phi_i(x) int_Omega J_i(x - y) dy)
//                  + sum_k m_ik(x) phi_k(x)
//
// on a midpoint grid. The bracketed term is present for the Neumann (SIS)
// form. Unknowns are laid out species-major: index i * n + j holds species i
// at node j.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nld/coefficients.hpp"
#include "nld/domain.hpp"
#include "nld/error.hpp"
#include "nld/perron.hpp"

namespace nld {

struct AssembledOperator {
  Eigen::MatrixXd matrix;
  std::vector<double> dispersal;
  bool neumann = false;
  /// Smallest diagonal lift making matrix + shift_c I nonnegative, plus one.
  double shift_c = 1.0;
  SpatialGrid grid;
  std::vector<Kernel> kernels;
  /// Pointwise reaction field M(x) entering the operator.
  CoefficientField reaction;
  std::vector<std::string> warnings;

  int species() const { return reaction.species(); }
  int nodes() const { return grid.size(); }
  Eigen::Index size() const { return matrix.rows(); }

  double min_off_diagonal() const {
    double lo = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < matrix.rows(); ++r)
      for (Eigen::Index c = 0; c < matrix.cols(); ++c)
        if (r != c) lo = std::min(lo, matrix(r, c));
    return lo;
  }

  bool metzler() const { return min_off_diagonal() >= 0.0; }

  double asymmetry() const { return (matrix - matrix.transpose()).cwiseAbs().maxCoeff(); }

  bool any_degenerate_species() const {
    for (double d : dispersal)
      if (d == 0.0) return true;
    return false;
  }
};

namespace detail {

inline std::vector<Kernel> broadcast_kernels(const std::vector<Kernel>& kernels, int species) {
  if (kernels.size() == 1 && species > 1) return std::vector<Kernel>(species, kernels.front());
  if (static_cast<int>(kernels.size()) != species)
    throw InvalidArgument("expected " + std::to_string(species) + " kernels, got " +
                          std::to_string(kernels.size()));
  return kernels;
}

inline void check_dispersal(const std::vector<double>& d, int species) {
  if (static_cast<int>(d.size()) != species)
    throw InvalidArgument("expected " + std::to_string(species) + " dispersal rates, got " +
                          std::to_string(d.size()));
  for (double v : d)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidArgument("dispersal rates must be finite and nonnegative");
}

}  // namespace detail

/// Block-diagonal (over nodes) embedding of a pointwise m x m field into the
/// species-major (m n) x (m n) layout.
inline Eigen::MatrixXd reaction_block(const CoefficientField& field) {
  const int m = field.species();
  const int n = field.nodes();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m) * n,
                                               static_cast<Eigen::Index>(m) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k) out(i * n + j, k * n + j) = field.at(j)(i, k);
  return out;
}

/// Dispersal part only: diag_i(d_i K_i) and, for the Neumann form, minus
/// d_i times the row masses on the diagonal.
inline Eigen::MatrixXd dispersal_block(const SpatialGrid& grid, const std::vector<Kernel>& kernels,
                                       const std::vector<double>& dispersal, bool neumann,
                                       std::vector<std::string>* warnings = nullptr) {
  const int m = static_cast<int>(dispersal.size());
  const int n = grid.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m) * n,
                                               static_cast<Eigen::Index>(m) * n);
  for (int i = 0; i < m; ++i) {
    if (dispersal[i] == 0.0) continue;
    const Eigen::MatrixXd k = kernel_matrix(grid, kernels[i], warnings);
    out.block(i * n, i * n, n, n) = dispersal[i] * k;
    if (neumann) {
      const Eigen::VectorXd mass = kernel_row_masses(grid, kernels[i]);
      for (int j = 0; j < n; ++j) out(i * n + j, i * n + j) -= dispersal[i] * mass[j];
    }
  }
  return out;
}

/// Generic assembly shared by every operator below.
inline AssembledOperator assemble_operator(const SpatialGrid& grid, const std::vector<Kernel>& kernels,
                                           const std::vector<double>& dispersal,
                                           const CoefficientField& reaction, bool neumann) {
  const int m = reaction.species();
  if (reaction.nodes() != grid.size())
    throw InvalidArgument("reaction field has " + std::to_string(reaction.nodes()) +
                          " nodes, grid has " + std::to_string(grid.size()));
  detail::check_dispersal(dispersal, m);
  AssembledOperator op;
  op.kernels = detail::broadcast_kernels(kernels, m);
  op.grid = grid;
  op.dispersal = dispersal;
  op.neumann = neumann;
  op.reaction = reaction;
  op.matrix = dispersal_block(grid, op.kernels, dispersal, neumann, &op.warnings);
  op.matrix += reaction_block(reaction);
  op.shift_c = metzler_shift(op.matrix);
  return op;
}

/// L phi = D J phi + M phi.
inline AssembledOperator assemble_L(const SpatialGrid& grid, const std::vector<Kernel>& kernels,
                                    const std::vector<double>& dispersal,
                                    const CoefficientField& m_field) {
  return assemble_operator(grid, kernels, dispersal, m_field, false);
}

/// L_inf phi = D J phi + A phi.
inline AssembledOperator assemble_L_infinity(const SpatialGrid& grid,
                                             const std::vector<Kernel>& kernels,
                                             const std::vector<double>& dispersal,
                                             const CoefficientField& a_field) {
  return assemble_operator(grid, kernels, dispersal, a_field, false);
}

namespace detail {
inline void check_weighted_inputs(const CoefficientField& a, const CoefficientField& f) {
  if (!a.cooperative()) throw InvalidArgument("A must be cooperative");
  if (!f.nonnegative()) throw InvalidArgument("F must be entrywise nonnegative");
  if (a.species() != f.species() || a.nodes() != f.nodes())
    throw InvalidArgument("A and F differ in shape");
}
inline void check_mu(double mu) {
  if (!(mu > 0.0) || std::isnan(mu)) throw InvalidArgument("mu must be positive");
}
}  // namespace detail

/// L_mu phi = D J phi + A phi + (1/mu) F phi.
inline AssembledOperator assemble_Lmu(const SpatialGrid& grid, const std::vector<Kernel>& kernels,
                                      const std::vector<double>& dispersal,
                                      const CoefficientField& a_field,
                                      const CoefficientField& f_field, double mu) {
  detail::check_mu(mu);
  detail::check_weighted_inputs(a_field, f_field);
  if (!f_field.not_identically_zero()) throw InvalidArgument("F is identically zero");
  return assemble_operator(grid, kernels, dispersal, a_field + f_field.scaled(1.0 / mu), false);
}

/// Pointwise Kbeta(x) / (m(x) + K): the infection coefficient of the SIS
/// linearization at the disease-free state (K, 0).
inline ScalarField sis_infection_rate(const ScalarField& beta, const ScalarField& m_sat, double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("K must be positive");
  if (beta.size() != m_sat.size()) throw InvalidArgument("beta and m differ in length");
  Eigen::VectorXd v(beta.size());
  for (int j = 0; j < beta.size(); ++j) v[j] = k * beta[j] / (m_sat[j] + k);
  return ScalarField(std::move(v));
}

/// Neumann SIS operator
///   d_I int J(x - y)[phi(y) - phi(x)] dy - gamma phi + K beta / (mu (m + K)) phi,
/// with mu = +infinity dropping the infection term.
inline AssembledOperator assemble_sis(const SpatialGrid& grid, const Kernel& kernel, double d_i,
                                      const ScalarField& beta, const ScalarField& gamma,
                                      const ScalarField& m_sat, double k, double mu) {
  if (!(d_i >= 0.0) || !std::isfinite(d_i)) throw InvalidArgument("d_I must be nonnegative");
  detail::check_mu(mu);
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("K must be positive");
  if (beta.size() != grid.size() || gamma.size() != grid.size() || m_sat.size() != grid.size())
    throw InvalidArgument("SIS coefficient fields do not match the grid");
  if (!beta.nonnegative() || !gamma.nonnegative() || !m_sat.nonnegative())
    throw InvalidArgument("beta, gamma and m must be nonnegative");
  Eigen::VectorXd r = -gamma.samples();
  if (std::isfinite(mu)) {
    const ScalarField infection = sis_infection_rate(beta, m_sat, k);
    r += infection.samples() / mu;
  }
  return assemble_operator(grid, {kernel}, {d_i}, CoefficientField::from_scalar(ScalarField(r)),
                           true);
}

/// s(M(x_j)) at every node, by shifted power iteration on each m x m sample.
inline Eigen::VectorXd pointwise_spectral_bounds(const CoefficientField& field) {
  if (!field.cooperative()) throw InvalidArgument("pointwise spectral bounds need a cooperative field");
  Eigen::VectorXd s(field.nodes());
  const PowerIterationOptions opt{1e-12, 100000, std::nullopt};
  for (int j = 0; j < field.nodes(); ++j) {
    const auto& a = field.at(j);
    s[j] = a.size() == 1 ? a(0, 0) : metzler_spectral_bound(a, opt);
  }
  return s;
}

/// Node membership of Omega_eps = {x : s(M(x)) >= lambda - eps}, lambda = max_x s(M(x)).
inline std::vector<bool> epsilon_region(const Eigen::VectorXd& pointwise_bounds, double eps) {
  const double lambda = pointwise_bounds.maxCoeff();
  std::vector<bool> in(pointwise_bounds.size());
  for (Eigen::Index j = 0; j < pointwise_bounds.size(); ++j)
    in[j] = pointwise_bounds[j] >= lambda - eps;
  return in;
}

/// L^eps: the reaction diagonal is lowered by 2 eps + s(M(x)) - lambda on
/// Omega_eps and by eps elsewhere, so that s(L^eps) <= s(L) <= s(L^eps) + 2 eps.
inline AssembledOperator assemble_epsilon_approx(const AssembledOperator& l,
                                                 const CoefficientField& m_field, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("eps must be positive");
  if (m_field.species() != l.species() || m_field.nodes() != l.nodes())
    throw InvalidArgument("reaction field does not match the operator");
  const Eigen::VectorXd s = pointwise_spectral_bounds(m_field);
  const double lambda = s.maxCoeff();
  const auto region = epsilon_region(s, eps);

  const int m = m_field.species();
  const int n = m_field.nodes();
  AssembledOperator out = l;
  auto samples = m_field.samples();
  for (int j = 0; j < n; ++j) {
    const double drop = region[j] ? 2.0 * eps + (s[j] - lambda) : eps;
    samples[j].diagonal().array() -= drop;
    for (int i = 0; i < m; ++i) out.matrix(i * n + j, i * n + j) -= drop;
  }
  out.reaction = CoefficientField(m, std::move(samples));
  out.shift_c = metzler_shift(out.matrix);
  return out;
}

}  // namespace nld

#endif  // NLD_ASSEMBLY_HPP
