#include "tvkb/kernel.hpp"

#include <cmath>
#include <limits>

#include "tvkb/error.hpp"

namespace tvkb {

namespace {

bool is_half_integer(double nu, double target) { return std::abs(nu - target) < 1e-12; }

}  // namespace

std::string to_string(KernelFamily family) {
  return family == KernelFamily::matern ? "matern" : "se";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "matern") return KernelFamily::matern;
  if (name == "se" || name == "squared-exponential" || name == "squared_exponential") {
    return KernelFamily::squared_exponential;
  }
  throw ValidationError("unknown kernel family '" + name + "'");
}

KernelSpec KernelSpec::matern(double nu, double lengthscale) {
  if (!(nu > 0.0)) throw ValidationError("matern nu must be positive");
  if (!(lengthscale > 0.0)) throw ValidationError("lengthscale must be positive");
  return {KernelFamily::matern, nu, lengthscale};
}

KernelSpec KernelSpec::squared_exponential(double lengthscale) {
  if (!(lengthscale > 0.0)) throw ValidationError("lengthscale must be positive");
  return {KernelFamily::squared_exponential, std::numeric_limits<double>::infinity(),
          lengthscale};
}

bool KernelSpec::evaluable() const noexcept {
  if (!(lengthscale > 0.0)) return false;
  if (family == KernelFamily::squared_exponential) return true;
  return is_half_integer(nu, 0.5) || is_half_integer(nu, 1.5) || is_half_integer(nu, 2.5) ||
         is_half_integer(nu, 3.5);
}

double KernelSpec::smoothness() const noexcept {
  return family == KernelFamily::squared_exponential ? std::numeric_limits<double>::infinity()
                                                     : nu;
}

double kernel_of_distance(const KernelSpec& spec, double r) {
  if (!spec.evaluable()) {
    throw ValidationError("kernel evaluation supports matern nu in {1/2,3/2,5/2,7/2} or se");
  }
  const double s = r / spec.lengthscale;
  if (spec.family == KernelFamily::squared_exponential) return std::exp(-0.5 * s * s);

  if (is_half_integer(spec.nu, 0.5)) return std::exp(-s);
  if (is_half_integer(spec.nu, 1.5)) {
    const double a = std::sqrt(3.0) * s;
    return (1.0 + a) * std::exp(-a);
  }
  if (is_half_integer(spec.nu, 2.5)) {
    const double a = std::sqrt(5.0) * s;
    return (1.0 + a + a * a / 3.0) * std::exp(-a);
  }
  // nu = 7/2
  const double a = std::sqrt(7.0) * s;
  return (1.0 + a + 2.0 * a * a / 5.0 + a * a * a / 15.0) * std::exp(-a);
}

double kernel_eval(const KernelSpec& spec, const Point& x, const Point& y) {
  if (x.size() != y.size()) throw ValidationError("kernel_eval: dimension mismatch");
  // (x_i - y_i)^2 == (y_i - x_i)^2 bit-for-bit, so this is exactly symmetric.
  double sq = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    sq += diff * diff;
  }
  return kernel_of_distance(spec, std::sqrt(sq));
}

Eigen::VectorXd kernel_column(const KernelSpec& spec, std::span<const Point> points,
                              const Point& x) {
  Eigen::VectorXd col(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    col[static_cast<Eigen::Index>(i)] = kernel_eval(spec, points[i], x);
  }
  return col;
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const Point> points,
                            double jitter) {
  if (points.empty()) throw ValidationError("gram_matrix: empty point set");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = kernel_eval(spec, points[i], points[i]) + jitter;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = kernel_eval(spec, points[i], points[j]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

std::optional<Eigen::MatrixXd> cholesky_lower(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::MatrixXd lower = llt.matrixL();
  // LLT accepts tiny positive pivots that leave the factor useless.
  const double floor = 1e-300;
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    if (!(lower(i, i) > floor) || !std::isfinite(lower(i, i))) return std::nullopt;
  }
  return lower;
}

GramFactor factorize_with_jitter(const Eigen::MatrixXd& a) {
  if (auto lower = cholesky_lower(a)) return {std::move(*lower), 0.0};
  const auto n = a.rows();
  for (double jitter = 1e-12; jitter <= kMaxJitter * (1.0 + 1e-9); jitter *= 10.0) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += jitter;
    if (auto lower = cholesky_lower(shifted)) return {std::move(*lower), jitter};
  }
  throw NumericError("factorization failed with jitter up to 1e-8 (n = " +
                     std::to_string(n) + "); point set is numerically degenerate");
}

GramFactor factorize_gram(const KernelSpec& spec, std::span<const Point> points) {
  return factorize_with_jitter(gram_matrix(spec, points));
}

std::size_t cells_per_axis(double w) {
  if (!(w > 0.0) || w > 1.0) throw ValidationError("grid width must lie in (0, 1]");
  const double inv = 1.0 / w;
  return static_cast<std::size_t>(std::floor(inv * (1.0 + 1e-9)));
}

std::vector<Point> grid_centers(const GridSpec& grid) {
  if (grid.d == 0) throw ValidationError("grid dimension must be positive");
  const std::size_t n = cells_per_axis(grid.w);
  std::size_t total = 1;
  for (std::size_t k = 0; k < grid.d; ++k) total *= n;

  std::vector<Point> centers;
  centers.reserve(total);
  std::vector<std::size_t> idx(grid.d, 0);
  for (std::size_t c = 0; c < total; ++c) {
    Point p(static_cast<Eigen::Index>(grid.d));
    for (std::size_t k = 0; k < grid.d; ++k) {
      p[static_cast<Eigen::Index>(k)] = (static_cast<double>(idx[k]) + 0.5) * grid.w;
    }
    centers.push_back(std::move(p));
    for (std::size_t k = grid.d; k-- > 0;) {
      if (++idx[k] < n) break;
      idx[k] = 0;
    }
  }
  return centers;
}

std::vector<Point> uniform_grid(std::size_t d, std::size_t per_axis) {
  if (d == 0 || per_axis == 0) throw ValidationError("uniform_grid: empty grid");
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= per_axis;
  std::vector<Point> out;
  out.reserve(total);
  std::vector<std::size_t> idx(d, 0);
  const double step = per_axis == 1 ? 0.0 : 1.0 / static_cast<double>(per_axis - 1);
  for (std::size_t c = 0; c < total; ++c) {
    Point p(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
      p[static_cast<Eigen::Index>(k)] =
          per_axis == 1 ? 0.5 : static_cast<double>(idx[k]) * step;
    }
    out.push_back(std::move(p));
    for (std::size_t k = d; k-- > 0;) {
      if (++idx[k] < per_axis) break;
      idx[k] = 0;
    }
  }
  return out;
}

}  // namespace tvkb
