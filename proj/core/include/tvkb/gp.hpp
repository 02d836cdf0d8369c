#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tvkb/kernel.hpp"

namespace tvkb {

struct Posterior {
  double mean = 0.0;
  double variance = 1.0;
};

/// Regularized kernel-regression posterior
///   mu(x)     = k_n(x)^T (K_n + lambda I)^-1 y_n
///   sigma2(x) = k(x,x) - k_n(x)^T (K_n + lambda I)^-1 k_n(x)
/// with the Cholesky factor of K_n + lambda I grown one bordered row per
/// observation.
class GPState {
 public:
  GPState(KernelSpec kernel, double lambda);

  /// Batch construction; equivalent to successive update() calls.
  static GPState build(KernelSpec kernel, double lambda, std::span<const Point> inputs,
                       std::span<const double> targets);

  const KernelSpec& kernel() const noexcept { return kernel_; }
  double lambda() const noexcept { return lambda_; }
  std::size_t size() const noexcept { return inputs_.size(); }
  const std::vector<Point>& inputs() const noexcept { return inputs_; }
  const Eigen::VectorXd& targets() const noexcept { return targets_; }
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }
  /// Diagonal jitter added on top of lambda after a rebuild (normally 0).
  double jitter() const noexcept { return jitter_; }

  Posterior posterior(const Point& x) const;

  /// Appends (x, y). Falls back to a jittered full rebuild if the bordered
  /// pivot is not positive; throws NumericError if that fails too.
  void update(const Point& x, double y);

  void clear();

 private:
  void rebuild();

  KernelSpec kernel_;
  double lambda_;
  std::vector<Point> inputs_;
  Eigen::VectorXd targets_;
  Eigen::MatrixXd factor_;
  Eigen::VectorXd alpha_;  // (K_n + lambda I)^-1 y_n
  double jitter_ = 0.0;
};

/// mu + beta sigma and mu - beta sigma.
double ucb(const GPState& state, const Point& x, double beta);
double lcb(const GPState& state, const Point& x, double beta);

/// The same posterior restricted to a fixed finite candidate set, kept as a
/// mean vector and covariance matrix over the candidates. Each observation
/// at candidate j is a rank-one update, O(M^2) instead of O(n^2) per query.
class CandidatePosterior {
 public:
  CandidatePosterior(const KernelSpec& kernel, std::vector<Point> candidates, double lambda);

  std::size_t size() const noexcept { return candidates_.size(); }
  std::size_t observations() const noexcept { return observations_; }
  const std::vector<Point>& candidates() const noexcept { return candidates_; }

  double mean(std::size_t j) const { return mean_[static_cast<Eigen::Index>(j)]; }
  /// Posterior variance, clamped at 0 when within -1e-10.
  double variance(std::size_t j) const;

  void observe(std::size_t j, double y);
  void reset();

 private:
  std::vector<Point> candidates_;
  double lambda_;
  Eigen::MatrixXd prior_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  std::size_t observations_ = 0;
};

/// 1/2 log det(I + sigma^-2 K) for the given points; 0 for an empty set.
double info_gain(const KernelSpec& kernel, std::span<const Point> points, double sigma);

struct GreedyInfoGain {
  double gamma = 0.0;                 // info gain of the selected multiset
  std::vector<std::size_t> chosen;    // candidate indices in selection order
  std::vector<double> prefix;         // prefix[t-1] = gain of the first t picks
};

/// Greedy maximum-variance selection under noise sigma^2, ties to the lowest
/// index. Candidates may be picked more than once, so horizon may exceed the
/// candidate count. The result estimates the maximum information gain from
/// below; it is not the exact maximum.
GreedyInfoGain greedy_info_gain(const KernelSpec& kernel, std::span<const Point> candidates,
                                std::size_t horizon, double sigma);

struct ConfidenceParams {
  double norm_bound = 1.0;  // B
  double sigma = 0.1;
  double delta = 0.01;
  double lambda = 1.0;
};

/// sqrt(lambda) B + sigma sqrt(2 gamma_t + 2 log(1/delta)).
double beta_t(const ConfidenceParams& params, double gamma_t);

}  // namespace tvkb
