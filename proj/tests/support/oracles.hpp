#pragma once

// Independent reference computations and random generators shared by the
// unit and acceptance tests. Nothing here calls into the library's
// numerical routines except to evaluate the kernel pointwise.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "tvkb/kernel.hpp"

namespace oracle {

/// Matern kernel through the modified Bessel function of the second kind.
inline double matern_bessel(double nu, double ell, double r) {
  if (r == 0.0) return 1.0;
  const double z = std::sqrt(2.0 * nu) * r / ell;
  return std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(z, nu) * std::cyl_bessel_k(nu, z);
}

inline double se(double ell, double r) { return std::exp(-r * r / (2.0 * ell * ell)); }

/// Bump profile 2 eps exp(1 - 1/(1 - r^2)), r = 2 |x - c| / w.
inline double bump(double eps, double w, double dist) {
  const double r = 2.0 * dist / w;
  if (r >= 1.0) return 0.0;
  return 2.0 * eps * std::exp(1.0 - 1.0 / (1.0 - r * r));
}

/// Gram matrix by explicit double loop.
inline Eigen::MatrixXd gram(const tvkb::KernelSpec& k, const std::vector<tvkb::Point>& xs) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = tvkb::kernel_eval(k, xs[i], xs[j]);
  }
  return a;
}

/// Posterior mean and variance by a full-pivot LU solve of (K + lambda I).
inline std::pair<double, double> dense_posterior(const tvkb::KernelSpec& k,
                                                 const std::vector<tvkb::Point>& xs,
                                                 const std::vector<double>& ys, double lambda,
                                                 const tvkb::Point& x) {
  if (xs.empty()) return {0.0, tvkb::kernel_eval(k, x, x)};
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd a = gram(k, xs);
  a.diagonal().array() += lambda;
  Eigen::VectorXd y(n), kx(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = ys[static_cast<std::size_t>(i)];
    kx[i] = tvkb::kernel_eval(k, xs[static_cast<std::size_t>(i)], x);
  }
  const auto lu = a.fullPivLu();
  const double mean = kx.dot(lu.solve(y));
  const double var = tvkb::kernel_eval(k, x, x) - kx.dot(lu.solve(kx));
  return {mean, std::max(0.0, var)};
}

/// 1/2 log det(I + K / sigma^2) from the eigenvalues of K.
inline double info_gain(const tvkb::KernelSpec& k, const std::vector<tvkb::Point>& xs,
                        double sigma) {
  if (xs.empty()) return 0.0;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram(k, xs));
  double g = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    g += 0.5 * std::log1p(std::max(0.0, es.eigenvalues()[i]) / (sigma * sigma));
  }
  return g;
}

/// Minimal-norm interpolant norm sqrt(y^T K^-1 y) by LU.
inline double interpolant_norm(const tvkb::KernelSpec& k, const std::vector<tvkb::Point>& xs,
                               const Eigen::VectorXd& y) {
  return std::sqrt(std::max(0.0, y.dot(gram(k, xs).fullPivLu().solve(y))));
}

/// Hand-rolled generator source for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_);
  }
  std::size_t between(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_);
  }
  std::uint64_t bits() { return eng_(); }

  tvkb::Point point(std::size_t d) {
    tvkb::Point p(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = uniform();
    return p;
  }
  std::vector<tvkb::Point> points(std::size_t n, std::size_t d) {
    std::vector<tvkb::Point> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(point(d));
    return out;
  }
  /// Random evaluable kernel: Matern 1/2..7/2 or SE, lengthscale in [0.1, 1].
  tvkb::KernelSpec kernel() {
    const double ell = uniform(0.1, 1.0);
    const double nus[] = {0.5, 1.5, 2.5, 3.5};
    const auto pick = index(5);
    return pick == 4 ? tvkb::KernelSpec::squared_exponential(ell)
                     : tvkb::KernelSpec::matern(nus[pick], ell);
  }

 private:
  std::mt19937_64 eng_;
};

inline tvkb::Point pt(std::initializer_list<double> xs) {
  tvkb::Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

}  // namespace oracle
