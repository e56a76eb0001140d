#ifndef NLD_COEFFICIENTS_HPP
#define NLD_COEFFICIENTS_HPP

// Matrix-valued reaction fields M(x), A(x), F(x) sampled at grid nodes, and
// the scalar fields (beta, gamma, saturation m) of the SIS model.

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nld/domain.hpp"
#include "nld/error.hpp"

namespace nld {

/// Threshold below which a sampled coefficient counts as zero.
inline constexpr double kZeroTolerance = 1e-12;

/// True iff the digraph with edge i -> j whenever adjacency(i, j) is set
/// (i != j) is strongly connected. A single vertex is strongly connected.
inline bool strongly_connected(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& adjacency) {
  const int m = static_cast<int>(adjacency.rows());
  if (m <= 1) return true;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> reach = adjacency;
  for (int i = 0; i < m; ++i) reach(i, i) = true;
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      if (reach(i, k))
        for (int j = 0; j < m; ++j) reach(i, j) = reach(i, j) || reach(k, j);
  return reach.all();
}

namespace detail {

inline std::vector<std::vector<double>> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open table file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw InvalidArgument(path + ":" + std::to_string(line_no) + ": not a number: '" + tok +
                              "'");
      }
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidArgument(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(rows.front().size()) + " columns");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Real scalar samples on grid nodes.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(Eigen::VectorXd samples) : samples_(std::move(samples)) {
    for (double v : samples_)
      if (!std::isfinite(v)) throw InvalidArgument("scalar field contains non-finite values");
  }

  static ScalarField constant(const SpatialGrid& grid, double value) {
    return ScalarField(Eigen::VectorXd::Constant(grid.size(), value));
  }

  /// value + gradient . x
  static ScalarField affine(const SpatialGrid& grid, double value, Point gradient) {
    return from_function(grid, [&](const Point& x) {
      return value + gradient[0] * x[0] + gradient[1] * x[1];
    });
  }

  /// base + amplitude * exp(-|x - center|^2 / (2 width^2))
  static ScalarField gaussian_bump(const SpatialGrid& grid, double base, double amplitude,
                                   Point center, double width) {
    if (!(width > 0.0)) throw InvalidArgument("gaussian bump width must be positive");
    return from_function(grid, [&](const Point& x) {
      const double dx = x[0] - center[0];
      const double dy = grid.dimension() == 2 ? x[1] - center[1] : 0.0;
      return base + amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
    });
  }

  static ScalarField tabulated(const SpatialGrid& grid, const std::vector<double>& values) {
    if (static_cast<int>(values.size()) != grid.size())
      throw InvalidArgument("tabulated field has " + std::to_string(values.size()) +
                            " values for a grid of " + std::to_string(grid.size()) + " nodes");
    return ScalarField(Eigen::Map<const Eigen::VectorXd>(values.data(), grid.size()));
  }

  /// One value per line (first column); row count must equal the grid size.
  static ScalarField from_file(const SpatialGrid& grid, const std::string& path) {
    auto rows = detail::read_table(path);
    std::vector<double> v;
    v.reserve(rows.size());
    for (auto& r : rows) v.push_back(r.front());
    if (static_cast<int>(v.size()) != grid.size())
      throw InvalidArgument(path + ": " + std::to_string(v.size()) + " rows for a grid of " +
                            std::to_string(grid.size()) + " nodes");
    return tabulated(grid, v);
  }

  static ScalarField from_function(const SpatialGrid& grid,
                                   const std::function<double(const Point&)>& f) {
    Eigen::VectorXd s(grid.size());
    for (int j = 0; j < grid.size(); ++j) s[j] = f(grid.node(j));
    return ScalarField(std::move(s));
  }

  int size() const { return static_cast<int>(samples_.size()); }
  double operator[](int j) const { return samples_[j]; }
  const Eigen::VectorXd& samples() const { return samples_; }

  bool nonnegative() const { return samples_.size() == 0 || samples_.minCoeff() >= 0.0; }

  /// True iff some sample exceeds the zero tolerance in magnitude.
  bool not_identically_zero(double tol = kZeroTolerance) const {
    return samples_.size() > 0 && samples_.cwiseAbs().maxCoeff() > tol;
  }

 private:
  Eigen::VectorXd samples_;
};

/// Node indices where |field| <= tol (the degenerate set Sigma for the
/// saturation coefficient).
inline std::vector<int> zero_set(const ScalarField& field, double tol = kZeroTolerance) {
  std::vector<int> out;
  for (int j = 0; j < field.size(); ++j)
    if (std::abs(field[j]) <= tol) out.push_back(j);
  return out;
}

/// m x m real matrices sampled at n nodes. Structural flags are computed from
/// the samples on construction.
class CoefficientField {
 public:
  CoefficientField() = default;

  CoefficientField(int species, std::vector<Eigen::MatrixXd> samples)
      : species_(species), samples_(std::move(samples)) {
    if (species_ < 1) throw InvalidArgument("coefficient field needs at least one species");
    for (const auto& s : samples_) {
      if (s.rows() != species_ || s.cols() != species_)
        throw InvalidArgument("coefficient sample has wrong shape");
      if (!s.allFinite()) throw InvalidArgument("coefficient field contains non-finite values");
    }
    classify();
  }

  static CoefficientField constant(int nodes, const Eigen::MatrixXd& value) {
    if (value.rows() != value.cols()) throw InvalidArgument("coefficient matrix must be square");
    return CoefficientField(static_cast<int>(value.rows()),
                            std::vector<Eigen::MatrixXd>(nodes, value));
  }

  static CoefficientField from_function(const SpatialGrid& grid, int species,
                                        const std::function<Eigen::MatrixXd(const Point&)>& f) {
    std::vector<Eigen::MatrixXd> s;
    s.reserve(grid.size());
    for (int j = 0; j < grid.size(); ++j) s.push_back(f(grid.node(j)));
    return CoefficientField(species, std::move(s));
  }

  /// 1 x 1 field from scalar samples.
  static CoefficientField from_scalar(const ScalarField& field) {
    std::vector<Eigen::MatrixXd> s(field.size(), Eigen::MatrixXd(1, 1));
    for (int j = 0; j < field.size(); ++j) s[j](0, 0) = field[j];
    return CoefficientField(1, std::move(s));
  }

  /// Diagonal field diag(f_1(x), ..., f_m(x)).
  static CoefficientField diagonal(const std::vector<ScalarField>& fields) {
    if (fields.empty()) throw InvalidArgument("diagonal field needs at least one entry");
    const int n = fields.front().size();
    const int m = static_cast<int>(fields.size());
    std::vector<Eigen::MatrixXd> s(n, Eigen::MatrixXd::Zero(m, m));
    for (int i = 0; i < m; ++i) {
      if (fields[i].size() != n) throw InvalidArgument("diagonal entries differ in length");
      for (int j = 0; j < n; ++j) s[j](i, i) = fields[i][j];
    }
    return CoefficientField(m, std::move(s));
  }

  /// Rows are nodes, columns the m*m entries in row-major order (m_11, m_12, ...).
  static CoefficientField from_file(const SpatialGrid& grid, const std::string& path) {
    auto rows = detail::read_table(path);
    if (static_cast<int>(rows.size()) != grid.size())
      throw InvalidArgument(path + ": " + std::to_string(rows.size()) + " rows for a grid of " +
                            std::to_string(grid.size()) + " nodes");
    const auto cols = rows.front().size();
    const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cols))));
    if (static_cast<std::size_t>(m * m) != cols)
      throw InvalidArgument(path + ": column count " + std::to_string(cols) +
                            " is not a perfect square");
    std::vector<Eigen::MatrixXd> s;
    s.reserve(rows.size());
    for (const auto& r : rows) {
      Eigen::MatrixXd a(m, m);
      for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k) a(i, k) = r[i * m + k];
      s.push_back(std::move(a));
    }
    return CoefficientField(m, std::move(s));
  }

  int species() const { return species_; }
  int nodes() const { return static_cast<int>(samples_.size()); }
  const Eigen::MatrixXd& at(int j) const { return samples_[j]; }
  const std::vector<Eigen::MatrixXd>& samples() const { return samples_; }

  bool cooperative() const { return cooperative_; }
  bool nonnegative() const { return nonnegative_; }
  bool symmetric() const { return symmetric_; }
  bool weakly_irreducible() const { return weakly_irreducible_; }
  bool strongly_irreducible() const { return strongly_irreducible_; }

  /// True iff some entry at some node exceeds the zero tolerance in magnitude.
  bool not_identically_zero() const {
    for (const auto& s : samples_)
      if (s.cwiseAbs().maxCoeff() > kZeroTolerance) return true;
    return false;
  }

  CoefficientField scaled(double factor) const {
    auto s = samples_;
    for (auto& a : s) a *= factor;
    return CoefficientField(species_, std::move(s));
  }

  friend CoefficientField operator+(const CoefficientField& a, const CoefficientField& b) {
    if (a.species_ != b.species_ || a.nodes() != b.nodes())
      throw InvalidArgument("coefficient fields differ in shape");
    auto s = a.samples_;
    for (std::size_t j = 0; j < s.size(); ++j) s[j] += b.samples_[j];
    return CoefficientField(a.species_, std::move(s));
  }

 private:
  void classify() {
    const int m = species_;
    cooperative_ = nonnegative_ = symmetric_ = true;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> ever =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m, m, false);
    strongly_irreducible_ = true;
    for (const auto& s : samples_) {
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> here(m, m);
      for (int i = 0; i < m; ++i) {
        for (int k = 0; k < m; ++k) {
          const double v = s(i, k);
          if (v < 0.0) {
            nonnegative_ = false;
            if (i != k) cooperative_ = false;
          }
          if (std::abs(v - s(k, i)) > kZeroTolerance) symmetric_ = false;
          here(i, k) = i != k && std::abs(v) > kZeroTolerance;
          ever(i, k) = ever(i, k) || here(i, k);
        }
      }
      if (!strongly_connected(here)) strongly_irreducible_ = false;
    }
    weakly_irreducible_ = strongly_connected(ever);
  }

  int species_ = 0;
  std::vector<Eigen::MatrixXd> samples_;
  bool cooperative_ = true;
  bool nonnegative_ = true;
  bool symmetric_ = true;
  bool weakly_irreducible_ = true;
  bool strongly_irreducible_ = true;
};

/// Strong connectivity of the species digraph built from
/// "max_x |m_ij(x)| > 0" (off-diagonal).
inline bool check_weak_irreducibility(const CoefficientField& field) {
  return field.weakly_irreducible();
}

/// Per-node irreducibility of the off-diagonal pattern, conjoined over nodes.
/// A scalar field (m = 1) is strongly irreducible.
inline bool check_strong_irreducibility(const CoefficientField& field) {
  return field.strongly_irreducible();
}

}  // namespace nld

#endif  // NLD_COEFFICIENTS_HPP
