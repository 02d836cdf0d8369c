#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tvkb {

/// A location in the unit cube [0,1]^d.
using Point = Eigen::VectorXd;

enum class KernelFamily { matern, squared_exponential };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Stationary isotropic kernel normalized so that k(x, x) = 1.
///
/// Any nu > 0 is accepted here because the hard-class scaling laws only
/// need nu as a number. Pointwise evaluation is restricted to the
/// half-integers 1/2, 3/2, 5/2 and 7/2, which have closed forms.
struct KernelSpec {
  KernelFamily family = KernelFamily::matern;
  double nu = 1.5;  // ignored for squared_exponential
  double lengthscale = 1.0;

  static KernelSpec matern(double nu, double lengthscale = 1.0);
  static KernelSpec squared_exponential(double lengthscale = 1.0);

  /// True when kernel_eval supports this spec.
  bool evaluable() const noexcept;

  /// Smoothness used by the scaling laws; +inf for the SE family.
  double smoothness() const noexcept;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Kernel value for two points of equal dimension.
/// Throws ValidationError on dimension mismatch or a non-evaluable spec.
double kernel_eval(const KernelSpec& spec, const Point& x, const Point& y);

/// Kernel as a function of the Euclidean distance r = ||x - y||.
double kernel_of_distance(const KernelSpec& spec, double r);

/// Cross-covariance column k(points_i, x).
Eigen::VectorXd kernel_column(const KernelSpec& spec, std::span<const Point> points,
                              const Point& x);

/// K_ij = k(p_i, p_j) with `jitter` added on the diagonal.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const Point> points,
                            double jitter = 0.0);

/// Lower Cholesky factor of a symmetric matrix, or nullopt if the matrix is
/// not numerically positive definite.
std::optional<Eigen::MatrixXd> cholesky_lower(const Eigen::MatrixXd& a);

struct GramFactor {
  Eigen::MatrixXd lower;  // L with L L^T = A + jitter I
  double jitter = 0.0;
};

/// Factorizes `a` under the jitter schedule 0, 1e-12, 1e-11, ..., 1e-8.
/// Throws NumericError once the schedule is exhausted.
GramFactor factorize_with_jitter(const Eigen::MatrixXd& a);

/// gram_matrix + factorize_with_jitter.
GramFactor factorize_gram(const KernelSpec& spec, std::span<const Point> points);

inline constexpr double kMaxJitter = 1e-8;

/// Regular axis-aligned grid of cells of width w on [0,1]^d.
struct GridSpec {
  std::size_t d = 1;
  double w = 1.0;
};

/// Number of cells per axis, floor(1/w) with a 1e-9 relative slack so that
/// w = 0.1 yields 10 rather than 9.
std::size_t cells_per_axis(double w);

/// Centers (i + 1/2) w of the fitted cells, ordered with the last axis
/// varying fastest. Throws ValidationError unless 0 < w <= 1 and d >= 1.
std::vector<Point> grid_centers(const GridSpec& grid);

/// Tensor grid with `per_axis` equally spaced points on [0,1] per axis
/// (endpoints included; a single point sits at 1/2).
std::vector<Point> uniform_grid(std::size_t d, std::size_t per_axis);

}  // namespace tvkb
