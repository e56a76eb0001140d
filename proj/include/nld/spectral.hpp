#ifndef NLD_SPECTRAL_HPP
#define NLD_SPECTRAL_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "nld/assembly.hpp"
#include "nld/domain.hpp"
#include "nld/error.hpp"
#include "nld/perron.hpp"

namespace nld {

enum class SpectralMethod { power_shift, rayleigh, cw_certificate };

inline std::string to_string(SpectralMethod m) {
  switch (m) {
    case SpectralMethod::power_shift: return "power-shift";
    case SpectralMethod::rayleigh: return "rayleigh";
    case SpectralMethod::cw_certificate: return "cw-certificate";
  }
  return "?";
}

struct SpectralReport {
  double bound = 0.0;
  std::optional<Eigen::VectorXd> principal_vector;
  /// max_x s(M(x)) of the pointwise (multiplication) part.
  double essential_bound = -std::numeric_limits<double>::infinity();
  SpectralMethod method = SpectralMethod::power_shift;
  /// |L phi - bound phi|_inf for the max-norm normalized principal vector.
  double residual = std::numeric_limits<double>::quiet_NaN();
  /// bound > essential_bound: a principal eigenvalue sits above the essential spectrum.
  bool principal_exists = false;
  long iterations = 0;
};

inline constexpr double kDefaultTolerance = 1e-12;
inline constexpr long kDefaultMaxIter = 100000;

/// Pointwise part of the operator: the reaction field, with the Neumann
/// diagonal -d_i int_Omega J_i(x - y) dy folded in when present.
inline CoefficientField multiplication_field(const AssembledOperator& op) {
  if (!op.neumann) return op.reaction;
  const int n = op.nodes();
  auto samples = op.reaction.samples();
  for (int i = 0; i < op.species(); ++i) {
    if (op.dispersal[i] == 0.0) continue;
    const Eigen::VectorXd mass = kernel_row_masses(op.grid, op.kernels[i]);
    for (int j = 0; j < n; ++j) samples[j](i, i) -= op.dispersal[i] * mass[j];
  }
  return CoefficientField(op.species(), std::move(samples));
}

/// max over nodes of the Perron bound of M(x_j).
inline double essential_bound(const CoefficientField& m_field) {
  return pointwise_spectral_bounds(m_field).maxCoeff();
}

/// s(L) by power iteration on shift_c I + L.
inline SpectralReport spectral_bound(const AssembledOperator& op, double tol = kDefaultTolerance,
                                     long max_iter = kDefaultMaxIter,
                                     std::optional<Eigen::VectorXd> start = std::nullopt) {
  if (!op.metzler()) throw InvalidArgument("spectral_bound needs a cooperative (Metzler) operator");
  Eigen::MatrixXd b = op.matrix;
  b.diagonal().array() += op.shift_c;
  const PerronResult pr = perron_root(b, {tol, max_iter, std::move(start)});

  SpectralReport rep;
  rep.method = SpectralMethod::power_shift;
  rep.bound = pr.root - op.shift_c;
  rep.iterations = pr.iterations;
  rep.residual = (op.matrix * pr.vector - rep.bound * pr.vector).lpNorm<Eigen::Infinity>();
  rep.principal_vector = pr.vector;
  rep.essential_bound = essential_bound(multiplication_field(op));
  rep.principal_exists = rep.bound > rep.essential_bound;
  return rep;
}

namespace detail {

struct SymmetricEigen {
  double value;
  Eigen::VectorXd vector;
  long iterations;
};

// Largest eigenvalue of a symmetric matrix whose spectrum is shifted to be
// nonnegative, with an optional projection applied every step (to restrict the
// iteration to an invariant subspace). Stops on the residual and the Rayleigh
// quotient both settling.
template <class Projection>
SymmetricEigen symmetric_power(const Eigen::MatrixXd& b, Projection project, double tol,
                               long max_iter) {
  const Eigen::Index n = b.rows();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  // A slight tilt keeps the start from being orthogonal to the target when the
  // projection removes constants.
  for (Eigen::Index i = 0; i < n; ++i) v[i] += 0.5 * std::sin(1.0 + 2.0 * static_cast<double>(i));
  project(v);
  double nv = v.norm();
  if (nv == 0.0) throw NumericalFailure("symmetric power iteration: start vector vanished");
  v /= nv;
  double theta_prev = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd w(n);
  for (long it = 1; it <= max_iter; ++it) {
    w.noalias() = b * v;
    project(w);
    const double theta = v.dot(w);
    const double scale = std::max(1.0, std::abs(theta));
    const double resid = (w - theta * v).norm();
    nv = w.norm();
    if (nv == 0.0) return {0.0, v, it};
    if ((resid <= 1e-9 * scale && std::abs(theta - theta_prev) <= tol * scale) ||
        resid <= 16.0 * std::numeric_limits<double>::epsilon() * scale)
      return {theta, w / nv, it};
    theta_prev = theta;
    v = w / nv;
  }
  throw NumericalFailure("symmetric power iteration did not converge");
}

inline Eigen::VectorXd species_weights(const AssembledOperator& op) {
  return op.grid.weights().replicate(op.species(), 1);
}

}  // namespace detail

/// Largest eigenvalue of a self-adjoint operator, i.e. the supremum of the
/// quadratic form phi^T L phi over weighted-unit phi. Refuses operators whose
/// matrix is not symmetric to 1e-10.
inline SpectralReport rayleigh_bound(const AssembledOperator& op, double tol = kDefaultTolerance,
                                     long max_iter = kDefaultMaxIter) {
  if (op.asymmetry() > 1e-10) throw Refusal("operator is not self-adjoint");
  const Eigen::MatrixXd sym = 0.5 * (op.matrix + op.matrix.transpose());
  // Gershgorin lower bound makes the shifted spectrum nonnegative.
  double shift = 0.0;
  for (Eigen::Index r = 0; r < sym.rows(); ++r)
    shift = std::max(shift, sym.row(r).cwiseAbs().sum() - 2.0 * sym(r, r));
  Eigen::MatrixXd b = sym;
  b.diagonal().array() += shift;
  const auto eig = detail::symmetric_power(b, [](Eigen::VectorXd&) {}, tol, max_iter);

  SpectralReport rep;
  rep.method = SpectralMethod::rayleigh;
  rep.bound = eig.value - shift;
  rep.iterations = eig.iterations;
  Eigen::VectorXd v = eig.vector;
  if (v.sum() < 0.0) v = -v;
  v /= v.cwiseAbs().maxCoeff();
  rep.residual = (op.matrix * v - rep.bound * v).lpNorm<Eigen::Infinity>();
  rep.principal_vector = v;
  if (op.metzler()) {
    rep.essential_bound = essential_bound(multiplication_field(op));
    rep.principal_exists = rep.bound > rep.essential_bound;
  }
  return rep;
}

/// <phi, L phi> / <phi, phi> in the grid-weighted inner product.
inline double rayleigh_quotient(const AssembledOperator& op, const Eigen::VectorXd& phi) {
  if (phi.size() != op.size()) throw InvalidArgument("test vector has the wrong length");
  const Eigen::VectorXd w = detail::species_weights(op);
  const double norm2 = (w.array() * phi.array().square()).sum();
  if (!(norm2 > 0.0)) throw InvalidArgument("rayleigh_quotient of the zero vector");
  const Eigen::VectorXd lphi = op.matrix * phi;
  return (w.array() * phi.array() * lphi.array()).sum() / norm2;
}

/// Discrete alpha: the minimum over weighted-mean-zero u of
///   (1/2) sum_jk w_j w_k J(x_j - x_k) (u_k - u_j)^2 / sum_j w_j u_j^2.
/// Computed as c minus the top of the spectrum of c I - (diag(mass) - K)
/// restricted to mean-zero vectors.
inline double compute_alpha(const SpatialGrid& grid, const Kernel& kernel,
                            double tol = kDefaultTolerance, long max_iter = kDefaultMaxIter) {
  const Eigen::MatrixXd k = kernel_matrix(grid, kernel);
  const Eigen::VectorXd mass = kernel_row_masses(grid, kernel);
  Eigen::MatrixXd form = -k;
  form.diagonal() += mass;
  const Eigen::MatrixXd sym = 0.5 * (form + form.transpose());
  const double c = 2.0 * mass.maxCoeff();
  Eigen::MatrixXd b = -sym;
  b.diagonal().array() += c;
  const Eigen::VectorXd w = grid.weights();
  const double wsum = w.sum();
  auto project = [&](Eigen::VectorXd& v) { v.array() -= w.dot(v) / wsum; };
  const auto eig = detail::symmetric_power(b, project, tol, max_iter);
  return c - eig.value;
}

/// r(Q) of an entrywise nonnegative matrix. Entries in [-1e-10, 0) are read as
/// zero; anything more negative is rejected.
inline PerronResult spectral_radius_pair(const Eigen::MatrixXd& q, double tol = kDefaultTolerance,
                                         long max_iter = kDefaultMaxIter) {
  if (q.rows() == 0 || q.rows() != q.cols()) throw InvalidArgument("spectral_radius needs a square matrix");
  if (q.minCoeff() < -1e-10) throw InvalidArgument("spectral_radius needs a nonnegative matrix");
  const Eigen::MatrixXd qp = q.cwiseMax(0.0);
  if (qp.maxCoeff() == 0.0) {
    PerronResult z;
    z.vector = Eigen::VectorXd::Ones(q.rows());
    z.cw_lower = z.cw_upper = 0.0;
    z.certified = true;
    return z;
  }
  // A diagonal lift of a quarter of the row-sum norm removes any periodicity
  // (eigenvalues of equal modulus on the circle) without slowing convergence much.
  const double c = 0.25 * qp.rowwise().sum().maxCoeff();
  Eigen::MatrixXd b = qp;
  b.diagonal().array() += c;
  PerronResult pr = perron_root(b, {tol, max_iter, std::nullopt});
  pr.root -= c;
  pr.cw_lower -= c;
  pr.cw_upper -= c;
  return pr;
}

inline double spectral_radius(const Eigen::MatrixXd& q, double tol = kDefaultTolerance,
                              long max_iter = kDefaultMaxIter) {
  return spectral_radius_pair(q, tol, max_iter).root;
}

}  // namespace nld

#endif  // NLD_SPECTRAL_HPP
