#ifndef NLD_DOMAIN_HPP
#define NLD_DOMAIN_HPP

// Midpoint-rule grids on intervals and axis-aligned rectangles, together with
// the radially symmetric dispersal kernels J used by every assembled operator.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nld/error.hpp"

namespace nld {

using Point = std::array<double, 2>;

/// Extents of an interval (dimension 1) or an axis-aligned rectangle (dimension 2).
struct Bounds {
  int dimension = 1;
  Point lower{0.0, 0.0};
  Point upper{1.0, 0.0};

  static Bounds interval(double a, double b) { return {1, {a, 0.0}, {b, 0.0}}; }
  static Bounds rectangle(double x0, double x1, double y0, double y1) {
    return {2, {x0, y0}, {x1, y1}};
  }

  double extent(int axis) const { return upper[axis] - lower[axis]; }

  double measure() const {
    return dimension == 1 ? extent(0) : extent(0) * extent(1);
  }
};

class SpatialGrid {
 public:
  SpatialGrid() = default;

  int dimension() const { return bounds_.dimension; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int per_axis() const { return per_axis_; }
  const Bounds& bounds() const { return bounds_; }
  const std::vector<Point>& nodes() const { return nodes_; }
  const Point& node(int j) const { return nodes_[j]; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double weight(int j) const { return weights_[j]; }
  double measure() const { return bounds_.measure(); }

  /// Node spacing along an axis.
  double spacing(int axis) const { return bounds_.extent(axis) / per_axis_; }

  /// Largest spacing over the active axes.
  double max_spacing() const {
    return dimension() == 1 ? spacing(0) : std::max(spacing(0), spacing(1));
  }

 private:
  friend SpatialGrid build_grid(const Bounds& bounds, int n_per_axis);

  Bounds bounds_;
  int per_axis_ = 0;
  std::vector<Point> nodes_;
  Eigen::VectorXd weights_;
};

/// Uniform midpoint-rule grid with n_per_axis cells per axis. In 2D the nodes
/// are ordered x-fastest.
inline SpatialGrid build_grid(const Bounds& bounds, int n_per_axis) {
  if (bounds.dimension != 1 && bounds.dimension != 2)
    throw InvalidArgument("grid dimension must be 1 or 2");
  if (n_per_axis < 2)
    throw InvalidArgument("n_per_axis must be at least 2, got " + std::to_string(n_per_axis));
  for (int a = 0; a < bounds.dimension; ++a) {
    if (!std::isfinite(bounds.lower[a]) || !std::isfinite(bounds.upper[a]) ||
        !(bounds.extent(a) > 0.0))
      throw InvalidArgument("domain bounds have zero or negative measure");
  }

  SpatialGrid grid;
  grid.bounds_ = bounds;
  grid.per_axis_ = n_per_axis;

  const double hx = bounds.extent(0) / n_per_axis;
  const int ny = bounds.dimension == 2 ? n_per_axis : 1;
  const double hy = bounds.dimension == 2 ? bounds.extent(1) / n_per_axis : 1.0;
  const int n = n_per_axis * ny;

  grid.nodes_.reserve(n);
  for (int iy = 0; iy < ny; ++iy) {
    const double y = bounds.dimension == 2 ? bounds.lower[1] + (iy + 0.5) * hy : 0.0;
    for (int ix = 0; ix < n_per_axis; ++ix)
      grid.nodes_.push_back({bounds.lower[0] + (ix + 0.5) * hx, y});
  }
  // Equal weights chosen so that they sum to |Omega| up to rounding.
  grid.weights_ = Eigen::VectorXd::Constant(n, bounds.measure() / n);
  return grid;
}

enum class KernelFamily { uniform, tent, truncated_gaussian };

inline std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::uniform: return "uniform";
    case KernelFamily::tent: return "tent";
    case KernelFamily::truncated_gaussian: return "truncated-gaussian";
  }
  return "?";
}

/// Radially symmetric dispersal kernel with compact support and unit mass on
/// R^dimension. Every family satisfies J(0) > 0 and J(-x) = J(x).
class Kernel {
 public:
  /// Top-hat of the given support radius.
  static Kernel uniform(double radius, int dimension = 1) {
    return Kernel(KernelFamily::uniform, radius, 0.0, dimension);
  }

  /// Linear decay from the origin to zero at |x| = width.
  static Kernel tent(double width, int dimension = 1) {
    return Kernel(KernelFamily::tent, width, 0.0, dimension);
  }

  /// Gaussian with standard deviation sigma cut off at |x| = radius and
  /// renormalized. radius defaults to 3 sigma.
  static Kernel truncated_gaussian(double sigma, int dimension = 1,
                                   std::optional<double> radius = std::nullopt) {
    return Kernel(KernelFamily::truncated_gaussian, radius.value_or(3.0 * sigma), sigma,
                  dimension);
  }

  KernelFamily family() const { return family_; }
  int dimension() const { return dimension_; }
  double support_radius() const { return radius_; }
  double sigma() const { return sigma_; }

  /// J at distance r >= 0 from the origin.
  double radial(double r) const {
    if (r > radius_) return 0.0;
    switch (family_) {
      case KernelFamily::uniform: return scale_;
      case KernelFamily::tent: return scale_ * (1.0 - r / radius_);
      case KernelFamily::truncated_gaussian:
        return scale_ * std::exp(-0.5 * r * r / (sigma_ * sigma_));
    }
    return 0.0;
  }

  /// J(x - y).
  double operator()(const Point& x, const Point& y) const {
    const double dx = x[0] - y[0];
    const double dy = dimension_ == 2 ? x[1] - y[1] : 0.0;
    return radial(std::sqrt(dx * dx + dy * dy));
  }

  double at_origin() const { return radial(0.0); }

 private:
  Kernel(KernelFamily family, double radius, double sigma, int dimension)
      : family_(family), dimension_(dimension), radius_(radius), sigma_(sigma) {
    if (dimension != 1 && dimension != 2)
      throw InvalidArgument("kernel dimension must be 1 or 2");
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw InvalidArgument("kernel support radius must be positive");
    if (family == KernelFamily::truncated_gaussian && !(sigma > 0.0))
      throw InvalidArgument("gaussian kernel sigma must be positive");
    scale_ = 1.0 / unnormalized_mass();
  }

  // Closed-form integral over R^d of the kernel shape with peak value 1
  // (tent, gaussian) or height 1 (uniform).
  double unnormalized_mass() const {
    using std::numbers::pi;
    const double r = radius_;
    switch (family_) {
      case KernelFamily::uniform:
        return dimension_ == 1 ? 2.0 * r : pi * r * r;
      case KernelFamily::tent:
        return dimension_ == 1 ? r : pi * r * r / 3.0;
      case KernelFamily::truncated_gaussian: {
        const double s = sigma_;
        if (dimension_ == 1)
          return s * std::sqrt(2.0 * pi) * std::erf(r / (s * std::sqrt(2.0)));
        return 2.0 * pi * s * s * (1.0 - std::exp(-0.5 * r * r / (s * s)));
      }
    }
    return 1.0;
  }

  KernelFamily family_;
  int dimension_;
  double radius_;
  double sigma_;
  double scale_ = 1.0;
};

/// Returns a message when the kernel support is too narrow for the grid to
/// keep neighbouring nodes coupled (radius < 2 h).
inline std::optional<std::string> kernel_resolution_warning(const SpatialGrid& grid,
                                                            const Kernel& kernel) {
  const double h = grid.max_spacing();
  if (kernel.support_radius() < 2.0 * h) {
    return "kernel support radius " + std::to_string(kernel.support_radius()) +
           " is below twice the grid spacing " + std::to_string(h) +
           "; the discrete operator may lose connectivity";
  }
  return std::nullopt;
}

namespace detail {
inline void check_kernel_grid(const SpatialGrid& grid, const Kernel& kernel) {
  if (grid.size() == 0) throw InvalidArgument("empty grid");
  if (kernel.dimension() != grid.dimension())
    throw InvalidArgument("kernel and grid dimensions differ");
}
}  // namespace detail

/// n x n matrix with entries J(x_j - x_k) w_k, the quadrature of y -> J(x_j - y) phi(y).
inline Eigen::MatrixXd kernel_matrix(const SpatialGrid& grid, const Kernel& kernel,
                                     std::vector<std::string>* warnings = nullptr) {
  detail::check_kernel_grid(grid, kernel);
  if (warnings) {
    if (auto w = kernel_resolution_warning(grid, kernel)) warnings->push_back(*w);
  }
  const int n = grid.size();
  Eigen::MatrixXd k(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) k(j, l) = kernel(grid.node(j), grid.node(l)) * grid.weight(l);
  return k;
}

/// Per-node partial mass int_Omega J(x_j - y) dy by the same quadrature as
/// kernel_matrix (row sums, accumulated in the same order).
inline Eigen::VectorXd kernel_row_masses(const SpatialGrid& grid, const Kernel& kernel) {
  detail::check_kernel_grid(grid, kernel);
  const int n = grid.size();
  Eigen::VectorXd mass(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int l = 0; l < n; ++l) s += kernel(grid.node(j), grid.node(l)) * grid.weight(l);
    mass[j] = s;
  }
  return mass;
}

}  // namespace nld

#endif  // NLD_DOMAIN_HPP
