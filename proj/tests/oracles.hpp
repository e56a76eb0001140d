#ifndef NLD_TESTS_ORACLES_HPP
#define NLD_TESTS_ORACLES_HPP

// Reference computations written independently of the library: plain loops,
// std::vector storage, no Eigen decompositions.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat to_mat(const Eigen::MatrixXd& a) {
  Mat m(a.rows(), std::vector<double>(a.cols()));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) m[i][j] = a(i, j);
  return m;
}

inline Eigen::MatrixXd from_mat(const Mat& m) {
  Eigen::MatrixXd a(m.size(), m.empty() ? 0 : m[0].size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) a(i, j) = m[i][j];
  return a;
}

/// Solves A X = B by Gaussian elimination with partial pivoting.
inline Mat gauss_solve(Mat a, Mat b) {
  const std::size_t n = a.size();
  const std::size_t k = b[0].size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (a[p][c] == 0.0) throw std::runtime_error("singular");
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
      for (std::size_t j = 0; j < k; ++j) b[r][j] -= f * b[c][j];
    }
  }
  Mat x(n, std::vector<double>(k));
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t r = n; r-- > 0;) {
      double s = b[r][j];
      for (std::size_t c = r + 1; c < n; ++c) s -= a[r][c] * x[c][j];
      x[r][j] = s / a[r][r];
    }
  }
  return x;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t l = 0; l < b.size(); ++l)
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][l] * b[l][j];
  return c;
}

/// Coefficients c_0..c_n of det(lambda I - A) = sum c_k lambda^k (c_n = 1),
/// by the Faddeev-LeVerrier recursion.
inline std::vector<double> char_poly(const Mat& a) {
  const std::size_t n = a.size();
  std::vector<double> c(n + 1, 0.0);
  c[n] = 1.0;
  Mat m(n, std::vector<double>(n, 0.0));  // M_0 = 0
  for (std::size_t k = 1; k <= n; ++k) {
    // M_k = A M_{k-1} + c_{n-k+1} I
    Mat am = matmul(a, m);
    for (std::size_t i = 0; i < n; ++i) am[i][i] += c[n - k + 1];
    m = am;
    const Mat amk = matmul(a, m);
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += amk[i][i];
    c[n - k] = -tr / static_cast<double>(k);
  }
  return c;
}

inline double poly_eval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
  return v;
}

/// Largest real root: scan down from the Cauchy bound for the first sign
/// change, then bisect.
inline double largest_real_root(const std::vector<double>& c, int scan = 200000) {
  double bound = 0.0;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) bound = std::max(bound, std::abs(c[k]));
  bound += 1.0;
  const double step = 2.0 * bound / scan;
  double hi = bound;
  double fhi = poly_eval(c, hi);
  for (int s = 1; s <= scan; ++s) {
    const double lo = bound - s * step;
    const double flo = poly_eval(c, lo);
    if ((flo <= 0.0) != (fhi <= 0.0) || flo == 0.0) {
      double a = lo, b = hi, fa = flo;
      for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = poly_eval(c, mid);
        if ((fm <= 0.0) == (fa <= 0.0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      return 0.5 * (a + b);
    }
    hi = lo;
    fhi = flo;
  }
  throw std::runtime_error("no real root");
}

/// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol,
                      int depth = 50) {
  const auto rec = [&](auto&& self, double lo, double hi, double flo, double fmid, double fhi,
                       double whole, double eps, int d) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const double flm = f(lm), frm = f(rm);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
      return left + right + (left + right - whole) / 15.0;
    return self(self, lo, mid, flo, flm, fmid, left, eps / 2, d - 1) +
           self(self, mid, hi, fmid, frm, fhi, right, eps / 2, d - 1);
  };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(rec, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

/// 1D kernel shapes written out directly.
inline double uniform_1d(double x, double r) { return std::abs(x) <= r ? 0.5 / r : 0.0; }
inline double tent_1d(double x, double w) {
  return std::abs(x) <= w ? (1.0 - std::abs(x) / w) / w : 0.0;
}

/// SplitMix64; deterministic across platforms, unlike std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : s_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int pick(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double normal() {
    const double u1 = uniform(1e-300, 1.0), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t s_;
};

}  // namespace oracle

#endif  // NLD_TESTS_ORACLES_HPP
