#include "tvkb/gp.hpp"

#include <algorithm>
#include <cmath>

#include "tvkb/error.hpp"

namespace tvkb {

namespace {

double clamp_variance(double v) { return v < 0.0 ? 0.0 : v; }

}  // namespace

GPState::GPState(KernelSpec kernel, double lambda) : kernel_(kernel), lambda_(lambda) {
  if (!(lambda > 0.0)) throw ValidationError("GP regularization lambda must be positive");
  clear();
}

GPState GPState::build(KernelSpec kernel, double lambda, std::span<const Point> inputs,
                       std::span<const double> targets) {
  if (inputs.size() != targets.size()) throw ValidationError("GPState: inputs/targets mismatch");
  GPState state(kernel, lambda);
  state.inputs_.assign(inputs.begin(), inputs.end());
  state.targets_ = Eigen::Map<const Eigen::VectorXd>(targets.data(),
                                                     static_cast<Eigen::Index>(targets.size()));
  state.rebuild();
  return state;
}

void GPState::clear() {
  inputs_.clear();
  targets_.resize(0);
  factor_.resize(0, 0);
  alpha_.resize(0);
  jitter_ = 0.0;
}

void GPState::rebuild() {
  if (inputs_.empty()) {
    clear();
    return;
  }
  Eigen::MatrixXd a = gram_matrix(kernel_, inputs_);
  a.diagonal().array() += lambda_;
  GramFactor f = factorize_with_jitter(a);
  factor_ = std::move(f.lower);
  jitter_ = f.jitter;
  const Eigen::VectorXd z = factor_.triangularView<Eigen::Lower>().solve(targets_);
  alpha_ = factor_.transpose().triangularView<Eigen::Upper>().solve(z);
}

Posterior GPState::posterior(const Point& x) const {
  const double prior = kernel_eval(kernel_, x, x);
  if (inputs_.empty()) return {0.0, prior};
  const Eigen::VectorXd k = kernel_column(kernel_, inputs_, x);
  const Eigen::VectorXd v = factor_.triangularView<Eigen::Lower>().solve(k);
  return {k.dot(alpha_), clamp_variance(prior - v.squaredNorm())};
}

void GPState::update(const Point& x, double y) {
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  const Eigen::VectorXd k = kernel_column(kernel_, inputs_, x);
  const double kxx = kernel_eval(kernel_, x, x) + lambda_ + jitter_;

  inputs_.push_back(x);
  targets_.conservativeResize(n + 1);
  targets_[n] = y;

  Eigen::VectorXd row = n > 0 ? Eigen::VectorXd(factor_.triangularView<Eigen::Lower>().solve(k))
                              : Eigen::VectorXd();
  const double pivot = kxx - (n > 0 ? row.squaredNorm() : 0.0);
  if (!(pivot > 0.0) || !std::isfinite(pivot)) {
    rebuild();
    return;
  }
  factor_.conservativeResize(n + 1, n + 1);
  if (n > 0) {
    factor_.block(n, 0, 1, n) = row.transpose();
    factor_.block(0, n, n, 1).setZero();
  }
  factor_(n, n) = std::sqrt(pivot);
  const Eigen::VectorXd z = factor_.triangularView<Eigen::Lower>().solve(targets_);
  alpha_ = factor_.transpose().triangularView<Eigen::Upper>().solve(z);
}

double ucb(const GPState& state, const Point& x, double beta) {
  const Posterior p = state.posterior(x);
  return p.mean + beta * std::sqrt(p.variance);
}

double lcb(const GPState& state, const Point& x, double beta) {
  const Posterior p = state.posterior(x);
  return p.mean - beta * std::sqrt(p.variance);
}

CandidatePosterior::CandidatePosterior(const KernelSpec& kernel, std::vector<Point> candidates,
                                       double lambda)
    : candidates_(std::move(candidates)), lambda_(lambda) {
  if (candidates_.empty()) throw ValidationError("candidate set must be non-empty");
  if (!(lambda > 0.0)) throw ValidationError("GP regularization lambda must be positive");
  prior_ = gram_matrix(kernel, candidates_);
  reset();
}

void CandidatePosterior::reset() {
  mean_ = Eigen::VectorXd::Zero(prior_.rows());
  cov_ = prior_;
  observations_ = 0;
}

double CandidatePosterior::variance(std::size_t j) const {
  const auto i = static_cast<Eigen::Index>(j);
  return clamp_variance(cov_(i, i));
}

void CandidatePosterior::observe(std::size_t j, double y) {
  if (j >= candidates_.size()) throw ValidationError("candidate index out of range");
  const auto i = static_cast<Eigen::Index>(j);
  const Eigen::VectorXd s = cov_.col(i);
  const double denom = s[i] + lambda_;
  mean_ += s * ((y - mean_[i]) / denom);
  cov_.noalias() -= s * (s.transpose() / denom);
  ++observations_;
}

double info_gain(const KernelSpec& kernel, std::span<const Point> points, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("info_gain: sigma must be positive");
  if (points.empty()) return 0.0;
  Eigen::MatrixXd a = gram_matrix(kernel, points) / (sigma * sigma);
  a.diagonal().array() += 1.0;
  const auto lower = cholesky_lower(a);
  if (!lower) throw NumericError("info_gain: factorization failed");
  return lower->diagonal().array().log().sum();
}

GreedyInfoGain greedy_info_gain(const KernelSpec& kernel, std::span<const Point> candidates,
                                std::size_t horizon, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("greedy_info_gain: sigma must be positive");
  GreedyInfoGain out;
  if (horizon == 0) return out;
  CandidatePosterior post(kernel, std::vector<Point>(candidates.begin(), candidates.end()),
                          sigma * sigma);
  out.chosen.reserve(horizon);
  out.prefix.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    std::size_t best = 0;
    double best_var = post.variance(0);
    for (std::size_t j = 1; j < post.size(); ++j) {
      const double v = post.variance(j);
      if (v > best_var) {
        best = j;
        best_var = v;
      }
    }
    out.gamma += 0.5 * std::log1p(best_var / (sigma * sigma));
    out.chosen.push_back(best);
    out.prefix.push_back(out.gamma);
    post.observe(best, 0.0);
  }
  return out;
}

double beta_t(const ConfidenceParams& params, double gamma_t) {
  if (!(gamma_t >= 0.0)) throw ValidationError("beta_t: gamma must be non-negative");
  if (!(params.delta > 0.0) || params.delta > 1.0) {
    throw ValidationError("beta_t: delta must lie in (0, 1]");
  }
  return std::sqrt(params.lambda) * params.norm_bound +
         params.sigma * std::sqrt(2.0 * gamma_t + 2.0 * std::log(1.0 / params.delta));
}

}  // namespace tvkb
