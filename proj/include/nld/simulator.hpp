#ifndef NLD_SIMULATOR_HPP
#define NLD_SIMULATOR_HPP

// Explicit RK4 integration of the semi-discrete SIS system on the quadrature grid.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nld/domain.hpp"
#include "nld/error.hpp"
#include "nld/sis.hpp"

namespace nld {

struct SimulationState {
  Eigen::VectorXd s;
  Eigen::VectorXd i;
  double t = 0.0;
  double dt = 0.0;
  /// int (S + I) at t = 0.
  double total0 = 0.0;
};

/// Precomputed dispersal data for one parameter set.
class SisSystem {
 public:
  explicit SisSystem(const SISParameters& p)
      : p_(p), k_(kernel_matrix(p.grid, p.kernel)), mass_(kernel_row_masses(p.grid, p.kernel)) {
    p.validate();
  }

  const SISParameters& params() const { return p_; }

  /// dt <= 0.1 / (max(d_S, d_I) max mass + max gamma + max beta).
  double stable_dt() const {
    const double rate = std::max(p_.d_s, p_.d_i) * mass_.maxCoeff() + p_.gamma.samples().maxCoeff() +
                        p_.beta.samples().maxCoeff();
    return 0.1 / rate;
  }

  double integral(const Eigen::VectorXd& u) const { return p_.grid.weights().dot(u); }

  void rhs(const Eigen::VectorXd& s, const Eigen::VectorXd& i, Eigen::VectorXd& ds,
           Eigen::VectorXd& di) const {
    const Eigen::Index n = s.size();
    ds.noalias() = p_.d_s * (k_ * s - mass_.cwiseProduct(s));
    di.noalias() = p_.d_i * (k_ * i - mass_.cwiseProduct(i));
    for (Eigen::Index j = 0; j < n; ++j) {
      const double den = p_.m_sat[j] + s[j] + i[j];
      // beta S I / (m + S + I) extends continuously by 0 to S = I = 0.
      const double incidence = den > 0.0 ? p_.beta[j] * s[j] * i[j] / den : 0.0;
      const double recovery = p_.gamma[j] * i[j];
      ds[j] += recovery - incidence;
      di[j] += incidence - recovery;
    }
  }

 private:
  SISParameters p_;
  Eigen::MatrixXd k_;
  Eigen::VectorXd mass_;
};

inline constexpr double kNegativeDensityLimit = 1e-12;

inline SimulationState initial_state(const SisSystem& sys, Eigen::VectorXd s0, Eigen::VectorXd i0,
                                     double dt) {
  const int n = sys.params().grid.size();
  if (s0.size() != n || i0.size() != n) throw InvalidArgument("initial data does not match the grid");
  if (s0.minCoeff() < 0.0 || i0.minCoeff() < 0.0)
    throw InvalidArgument("initial densities must be nonnegative");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  SimulationState st;
  st.total0 = sys.integral(s0) + sys.integral(i0);
  st.s = std::move(s0);
  st.i = std::move(i0);
  st.dt = dt;
  return st;
}

/// One classical RK4 step.
inline SimulationState step(const SimulationState& state, const SisSystem& sys) {
  const Eigen::Index n = state.s.size();
  const double h = state.dt;
  Eigen::VectorXd k1s(n), k1i(n), k2s(n), k2i(n), k3s(n), k3i(n), k4s(n), k4i(n);
  sys.rhs(state.s, state.i, k1s, k1i);
  sys.rhs(state.s + 0.5 * h * k1s, state.i + 0.5 * h * k1i, k2s, k2i);
  sys.rhs(state.s + 0.5 * h * k2s, state.i + 0.5 * h * k2i, k3s, k3i);
  sys.rhs(state.s + h * k3s, state.i + h * k3i, k4s, k4i);
  SimulationState next = state;
  next.s += (h / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
  next.i += (h / 6.0) * (k1i + 2.0 * k2i + 2.0 * k3i + k4i);
  next.t += h;
  const double lo = std::min(next.s.minCoeff(), next.i.minCoeff());
  if (lo < -kNegativeDensityLimit)
    throw NumericalFailure("dt too large: density " + std::to_string(lo) + " at t = " +
                           std::to_string(next.t));
  if (lo < 0.0) {
    next.s = next.s.cwiseMax(0.0);
    next.i = next.i.cwiseMax(0.0);
  }
  return next;
}

inline SimulationState step(const SimulationState& state, const SISParameters& params) {
  return step(state, SisSystem(params));
}

struct TrajectorySample {
  double t;
  double integral_s;
  double integral_i;
  double min_i;
  double max_i;
  /// |int (S + I) - total0| / total0
  double drift;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  /// (1/|Omega|) int (S0 + I0), the population density of the disease-free state.
  double k = 0.0;
  double max_drift = 0.0;
  SimulationState final_state;
};

/// Integrates to t_end with step dt (clamped to the stability bound when dt <= 0),
/// recording every record_every steps and the final time.
inline Trajectory run(const SisSystem& sys, Eigen::VectorXd s0, Eigen::VectorXd i0, double t_end,
                      double dt = 0.0, int record_every = 1) {
  if (!(t_end > 0.0)) throw InvalidArgument("t_end must be positive");
  if (record_every < 1) throw InvalidArgument("record_every must be at least 1");
  const double dt_max = sys.stable_dt();
  if (dt <= 0.0) dt = dt_max;
  const long steps = static_cast<long>(std::ceil(t_end / std::min(dt, dt_max) - 1e-9));
  dt = t_end / static_cast<double>(steps);

  Trajectory tr;
  SimulationState st = initial_state(sys, std::move(s0), std::move(i0), dt);
  tr.k = st.total0 / sys.params().grid.measure();
  auto record = [&](const SimulationState& x) {
    const double total = sys.integral(x.s) + sys.integral(x.i);
    const double drift = st.total0 > 0.0 ? std::abs(total - st.total0) / st.total0 : 0.0;
    tr.max_drift = std::max(tr.max_drift, drift);
    tr.samples.push_back(
        {x.t, sys.integral(x.s), sys.integral(x.i), x.i.minCoeff(), x.i.maxCoeff(), drift});
  };
  record(st);
  for (long k = 1; k <= steps; ++k) {
    SimulationState nx = step(st, sys);
    nx.total0 = st.total0;
    st = std::move(nx);
    if (k % record_every == 0 || k == steps) record(st);
  }
  tr.final_state = st;
  return tr;
}

inline Trajectory run(const SISParameters& params, Eigen::VectorXd s0, Eigen::VectorXd i0,
                      double t_end, double dt = 0.0, int record_every = 1) {
  return run(SisSystem(params), std::move(s0), std::move(i0), t_end, dt, record_every);
}

}  // namespace nld

#endif  // NLD_SIMULATOR_HPP
