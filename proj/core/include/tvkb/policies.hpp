#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tvkb/gp.hpp"
#include "tvkb/rng.hpp"

namespace tvkb {

enum class BetaMode { lemma_d3, hypothetical_one };

std::string to_string(BetaMode mode);
BetaMode beta_mode_from_string(const std::string& name);

struct Observation {
  std::size_t index = 0;  // candidate index
  double y = 0.0;
};

/// A sequential decision rule over a fixed candidate grid. Steps are
/// 1-based; select() is always followed by observe() for the same step.
class Policy {
 public:
  explicit Policy(std::vector<Point> candidates);
  virtual ~Policy() = default;

  Policy(const Policy&) = delete;
  Policy& operator=(const Policy&) = delete;

  virtual std::string name() const = 0;
  virtual std::size_t select(std::size_t t) = 0;
  virtual void observe(std::size_t t, const Observation& obs) = 0;
  /// Forget all observations.
  virtual void reset() = 0;
  /// Observations currently held by the model.
  virtual std::size_t history_size() const = 0;
  /// Reset, then replay `window` in order.
  virtual void refit(std::span<const Observation> window);

  const std::vector<Point>& candidates() const noexcept { return candidates_; }

 private:
  std::vector<Point> candidates_;
};

/// argmax_j ucb(state, candidates[j], beta), lowest index on ties.
std::size_t gp_ucb_select(const GPState& state, double beta, std::span<const Point> candidates);

/// GP-UCB on the candidate grid. beta_t follows the confidence lemma
/// (using the cached greedy information-gain estimate at the model's own
/// step count) or is fixed at 1.
class GpUcbPolicy final : public Policy {
 public:
  GpUcbPolicy(const KernelSpec& kernel, std::vector<Point> candidates, ConfidenceParams params,
              BetaMode mode, std::shared_ptr<const std::vector<double>> gamma_prefix);

  /// Replaces the beta schedule with a constant.
  void clamp_beta(double beta) { clamped_beta_ = beta; }
  /// beta used when the model holds `n` observations.
  double beta_for(std::size_t n) const;

  std::string name() const override;
  std::size_t select(std::size_t t) override;
  void observe(std::size_t t, const Observation& obs) override;
  void reset() override { posterior_.reset(); }
  std::size_t history_size() const override { return posterior_.observations(); }

  const CandidatePosterior& posterior() const noexcept { return posterior_; }

 private:
  CandidatePosterior posterior_;
  ConfidenceParams params_;
  BetaMode mode_;
  std::shared_ptr<const std::vector<double>> gamma_prefix_;
  std::optional<double> clamped_beta_;
};

/// Restarts the wrapped policy every `period` steps.
class RestartPolicy final : public Policy {
 public:
  RestartPolicy(std::unique_ptr<Policy> base, std::size_t period);

  std::string name() const override;
  std::size_t select(std::size_t t) override;
  void observe(std::size_t t, const Observation& obs) override;
  void reset() override;
  std::size_t history_size() const override { return base_->history_size(); }

 private:
  std::unique_ptr<Policy> base_;
  std::size_t period_;
  std::size_t since_reset_ = 0;
};

/// Keeps the wrapped policy's model equal to a fit on the last `window`
/// observations.
class SlidingWindowPolicy final : public Policy {
 public:
  SlidingWindowPolicy(std::unique_ptr<Policy> base, std::size_t window);

  std::string name() const override;
  std::size_t select(std::size_t t) override;
  void observe(std::size_t t, const Observation& obs) override;
  void reset() override;
  std::size_t history_size() const override { return base_->history_size(); }

 private:
  std::unique_ptr<Policy> base_;
  std::size_t window_;
  std::deque<Observation> recent_;
  bool stale_ = false;
};

/// Uniform over the first `arms` candidates (the bump centers).
class UniformRandomPolicy final : public Policy {
 public:
  UniformRandomPolicy(std::vector<Point> candidates, std::size_t arms, std::uint64_t seed);

  std::string name() const override { return "uniform-random"; }
  std::size_t select(std::size_t t) override;
  void observe(std::size_t, const Observation&) override { ++seen_; }
  void reset() override { seen_ = 0; }
  std::size_t history_size() const override { return seen_; }

 private:
  std::size_t arms_;
  SplitMix64 rng_;
  std::size_t seen_ = 0;
};

/// Plays a supplied per-step optimum.
class OraclePolicy final : public Policy {
 public:
  OraclePolicy(std::vector<Point> candidates, std::function<std::size_t(std::size_t)> optimum);

  std::string name() const override { return "oracle"; }
  std::size_t select(std::size_t t) override { return optimum_(t); }
  void observe(std::size_t, const Observation&) override { ++seen_; }
  void reset() override { seen_ = 0; }
  std::size_t history_size() const override { return seen_; }

 private:
  std::function<std::size_t(std::size_t)> optimum_;
  std::size_t seen_ = 0;
};

std::unique_ptr<Policy> restart_wrapper(std::unique_ptr<Policy> base, std::size_t period);
std::unique_ptr<Policy> sliding_window_wrapper(std::unique_ptr<Policy> base, std::size_t window);

// ---------------------------------------------------------------------------
// MASTER-reduction bound evaluators. Only the condition check and the bound
// formula; the meta-algorithm itself is not implemented.

struct MasterInputs {
  std::vector<double> g1;  // g_{1,t}, t = 1..T
  std::vector<double> g2;  // g_{2,t}
  double zeta = 1.0;
  double delta_budget = 1.0;  // Delta

  std::size_t horizon() const noexcept { return g1.size(); }
};

struct MasterProfile {
  std::vector<double> rho;          // rho_t = (g1_t sqrt(t) + g2_t) / t
  std::vector<bool> rho_floor_ok;   // rho_t >= 1/sqrt(t)
  std::vector<bool> monotone_ok;    // t rho_t >= (t-1) rho_{t-1}
  bool inputs_monotone = true;      // g1, g2 non-negative and non-decreasing
  bool valid = true;                // every flag holds
};

/// Violations are reported in the profile, never thrown.
MasterProfile master_condition_profile(const MasterInputs& inputs);

/// (g1^(2/3) + g2 g1^(-4/3)) zeta^(1/3) Delta^(1/3) T^(2/3) + (g1 + g2/g1) sqrt(T)
/// at t = T, all constants set to 1. An order-of-magnitude evaluator, not a
/// certified bound. Throws ValidationError if g1_T = 0.
double master_bound(const MasterInputs& inputs);

/// GP-UCB inputs: t rho_t = beta_t sqrt(t gamma_t log(T/delta)), so
/// g1_t = beta_t sqrt(gamma_t log(T/delta)), g2_t = 0,
/// zeta = gamma_T sqrt(log(T/delta)). hypothetical_one sets beta_t = 1.
MasterInputs gp_ucb_master_inputs(std::span<const double> gamma, const ConfidenceParams& params,
                                  BetaMode mode, double delta_budget);

}  // namespace tvkb
