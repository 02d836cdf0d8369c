#include "selftest.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "tvkb/gp.hpp"
#include "tvkb/kernel.hpp"
#include "tvkb/rng.hpp"

namespace tvkb::cli {

namespace {

KernelSpec random_kernel(SplitMix64& rng) {
  const double ell = 0.1 + 0.9 * rng.unit();
  const double nus[] = {0.5, 1.5, 2.5, 3.5};
  const auto pick = rng.below(5);
  return pick == 4 ? KernelSpec::squared_exponential(ell) : KernelSpec::matern(nus[pick], ell);
}

Point random_point(SplitMix64& rng, std::size_t d) {
  Point p(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = rng.unit();
  return p;
}

// Direct route: Gram matrix by double loop, solved with full-pivot LU.
struct DenseOracle {
  Eigen::MatrixXd gram_inv_apply(const KernelSpec& k, const std::vector<Point>& xs, double lambda,
                                 const Eigen::MatrixXd& rhs) const {
    const auto n = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = kernel_eval(k, xs[i], xs[j]);
      a(i, i) += lambda;
    }
    return a.fullPivLu().solve(rhs);
  }
};

double gp_case(SplitMix64& rng) {
  const KernelSpec k = random_kernel(rng);
  const std::size_t d = 1 + rng.below(3);
  const std::size_t n = 1 + rng.below(64);
  const double lambda = 0.01 + 0.99 * rng.unit();

  std::vector<Point> xs;
  Eigen::VectorXd ys(static_cast<Eigen::Index>(n));
  GPState state(k, lambda);
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back(random_point(rng, d));
    ys[static_cast<Eigen::Index>(i)] = 2.0 * rng.unit() - 1.0;
    state.update(xs.back(), ys[static_cast<Eigen::Index>(i)]);
  }
  const DenseOracle oracle;
  const Eigen::VectorXd alpha = oracle.gram_inv_apply(k, xs, lambda, ys);
  double dev = 0.0;
  for (int q = 0; q < 8; ++q) {
    const Point x = q < 2 ? xs[rng.below(n)] : random_point(rng, d);
    Eigen::VectorXd kx(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) kx[static_cast<Eigen::Index>(i)] = kernel_eval(k, xs[i], x);
    const double mu = kx.dot(alpha);
    const double var =
        std::max(0.0, kernel_eval(k, x, x) - kx.dot(oracle.gram_inv_apply(k, xs, lambda, kx).col(0)));
    const Posterior post = state.posterior(x);
    dev = std::max({dev, std::abs(post.mean - mu), std::abs(post.variance - var)});
  }
  return dev;
}

double candidate_case(SplitMix64& rng) {
  const KernelSpec k = random_kernel(rng);
  const std::size_t d = 1 + rng.below(2);
  const std::size_t m = 2 + rng.below(31);
  const double lambda = 0.01 + 0.99 * rng.unit();
  std::vector<Point> cands;
  for (std::size_t i = 0; i < m; ++i) cands.push_back(random_point(rng, d));

  CandidatePosterior post(k, cands, lambda);
  GPState state(k, lambda);
  const std::size_t steps = 1 + rng.below(48);
  for (std::size_t s = 0; s < steps; ++s) {
    const auto j = static_cast<std::size_t>(rng.below(m));
    const double y = 2.0 * rng.unit() - 1.0;
    post.observe(j, y);
    state.update(cands[j], y);
  }
  double dev = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const Posterior p = state.posterior(cands[j]);
    dev = std::max({dev, std::abs(p.mean - post.mean(j)), std::abs(p.variance - post.variance(j))});
  }
  return dev;
}

double matern_bessel(double nu, double ell, double r) {
  if (r == 0.0) return 1.0;
  const double z = std::sqrt(2.0 * nu) * r / ell;
  return std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(z, nu) * std::cyl_bessel_k(nu, z);
}

double matern_case() {
  double dev = 0.0;
  for (double nu : {0.5, 1.5, 2.5, 3.5}) {
    for (double ell : {0.1, 0.5, 2.0}) {
      const auto k = KernelSpec::matern(nu, ell);
      for (int i = 0; i <= 200; ++i) {
        const double r = 0.02 * i;
        dev = std::max(dev, std::abs(kernel_of_distance(k, r) - matern_bessel(nu, ell, r)));
      }
    }
  }
  return dev;
}

bool report(std::ostream& out, const char* name, double dev, double tol) {
  char line[160];
  const bool ok = dev <= tol;
  std::snprintf(line, sizeof line, "%-22s max_abs_dev=%.3e tol=%.0e %s\n", name, dev, tol,
                ok ? "ok" : "FAIL");
  out << line;
  return ok;
}

}  // namespace

bool run_selftest(std::ostream& out, unsigned cases) {
  SplitMix64 rng(0x5e1f7e57ULL);
  double gp_dev = 0.0;
  double cand_dev = 0.0;
  for (unsigned c = 0; c < cases; ++c) {
    gp_dev = std::max(gp_dev, gp_case(rng));
    cand_dev = std::max(cand_dev, candidate_case(rng));
  }
  bool ok = report(out, "incremental-posterior", gp_dev, 1e-8);
  ok = report(out, "candidate-posterior", cand_dev, 1e-8) && ok;
  ok = report(out, "matern-closed-form", matern_case(), 1e-10) && ok;
  return ok;
}

}  // namespace tvkb::cli
