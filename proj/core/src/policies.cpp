#include "tvkb/policies.hpp"

#include <cmath>

#include "tvkb/error.hpp"

namespace tvkb {

std::string to_string(BetaMode mode) {
  return mode == BetaMode::lemma_d3 ? "lemma-d3" : "hypothetical-one";
}

BetaMode beta_mode_from_string(const std::string& name) {
  if (name == "lemma-d3") return BetaMode::lemma_d3;
  if (name == "hypothetical-one") return BetaMode::hypothetical_one;
  throw ValidationError("unknown beta_mode '" + name + "'");
}

Policy::Policy(std::vector<Point> candidates) : candidates_(std::move(candidates)) {
  if (candidates_.empty()) throw ValidationError("policy needs a non-empty candidate grid");
}

void Policy::refit(std::span<const Observation> window) {
  reset();
  // Replayed observations carry no meaningful step; wrappers ignore it.
  for (const auto& obs : window) observe(0, obs);
}

std::size_t gp_ucb_select(const GPState& state, double beta, std::span<const Point> candidates) {
  if (candidates.empty()) throw ValidationError("gp_ucb_select: no candidates");
  std::size_t best = 0;
  double best_score = ucb(state, candidates[0], beta);
  for (std::size_t j = 1; j < candidates.size(); ++j) {
    const double score = ucb(state, candidates[j], beta);
    if (score > best_score) {
      best = j;
      best_score = score;
    }
  }
  return best;
}

GpUcbPolicy::GpUcbPolicy(const KernelSpec& kernel, std::vector<Point> candidates,
                         ConfidenceParams params, BetaMode mode,
                         std::shared_ptr<const std::vector<double>> gamma_prefix)
    : Policy(candidates),
      posterior_(kernel, std::move(candidates), params.lambda),
      params_(params),
      mode_(mode),
      gamma_prefix_(std::move(gamma_prefix)) {
  if (mode_ == BetaMode::lemma_d3 && (!gamma_prefix_ || gamma_prefix_->empty())) {
    throw ValidationError("lemma-d3 beta needs an information-gain schedule");
  }
}

double GpUcbPolicy::beta_for(std::size_t n) const {
  if (clamped_beta_) return *clamped_beta_;
  if (mode_ == BetaMode::hypothetical_one) return 1.0;
  // beta_t with t = n + 1 uses gamma_{t-1}; gamma_0 = 0.
  const auto& g = *gamma_prefix_;
  const double gamma = n == 0 ? 0.0 : g[std::min(n, g.size()) - 1];
  return beta_t(params_, gamma);
}

std::string GpUcbPolicy::name() const {
  return mode_ == BetaMode::lemma_d3 ? "gp-ucb" : "gp-ucb(beta=1)";
}

std::size_t GpUcbPolicy::select(std::size_t) {
  const double beta = beta_for(posterior_.observations());
  std::size_t best = 0;
  double best_score = posterior_.mean(0) + beta * std::sqrt(posterior_.variance(0));
  for (std::size_t j = 1; j < posterior_.size(); ++j) {
    const double score = posterior_.mean(j) + beta * std::sqrt(posterior_.variance(j));
    if (score > best_score) {
      best = j;
      best_score = score;
    }
  }
  return best;
}

void GpUcbPolicy::observe(std::size_t, const Observation& obs) {
  posterior_.observe(obs.index, obs.y);
}

RestartPolicy::RestartPolicy(std::unique_ptr<Policy> base, std::size_t period)
    : Policy(base ? base->candidates() : std::vector<Point>{}),
      base_(std::move(base)),
      period_(period) {
  if (period_ < 1) throw ValidationError("restart period H must be >= 1");
}

std::string RestartPolicy::name() const {
  return "restart(" + std::to_string(period_) + ")-" + base_->name();
}

std::size_t RestartPolicy::select(std::size_t t) {
  if (since_reset_ == period_) {
    base_->reset();
    since_reset_ = 0;
  }
  return base_->select(t);
}

void RestartPolicy::observe(std::size_t t, const Observation& obs) {
  base_->observe(t, obs);
  ++since_reset_;
}

void RestartPolicy::reset() {
  base_->reset();
  since_reset_ = 0;
}

SlidingWindowPolicy::SlidingWindowPolicy(std::unique_ptr<Policy> base, std::size_t window)
    : Policy(base ? base->candidates() : std::vector<Point>{}),
      base_(std::move(base)),
      window_(window) {
  if (window_ < 1) throw ValidationError("sliding window W must be >= 1");
}

std::string SlidingWindowPolicy::name() const {
  return "window(" + std::to_string(window_) + ")-" + base_->name();
}

std::size_t SlidingWindowPolicy::select(std::size_t t) {
  if (stale_) {
    const std::vector<Observation> window(recent_.begin(), recent_.end());
    base_->refit(window);
    stale_ = false;
  }
  return base_->select(t);
}

void SlidingWindowPolicy::observe(std::size_t t, const Observation& obs) {
  recent_.push_back(obs);
  if (recent_.size() > window_) {
    recent_.pop_front();
    stale_ = true;
  } else if (!stale_) {
    base_->observe(t, obs);
  }
}

void SlidingWindowPolicy::reset() {
  base_->reset();
  recent_.clear();
  stale_ = false;
}

UniformRandomPolicy::UniformRandomPolicy(std::vector<Point> candidates, std::size_t arms,
                                         std::uint64_t seed)
    : Policy(std::move(candidates)), arms_(arms), rng_(seed) {
  if (arms_ < 1 || arms_ > this->candidates().size()) {
    throw ValidationError("uniform-random: arm count outside the candidate grid");
  }
}

std::size_t UniformRandomPolicy::select(std::size_t) { return rng_.below(arms_); }

OraclePolicy::OraclePolicy(std::vector<Point> candidates,
                           std::function<std::size_t(std::size_t)> optimum)
    : Policy(std::move(candidates)), optimum_(std::move(optimum)) {}

std::unique_ptr<Policy> restart_wrapper(std::unique_ptr<Policy> base, std::size_t period) {
  return std::make_unique<RestartPolicy>(std::move(base), period);
}

std::unique_ptr<Policy> sliding_window_wrapper(std::unique_ptr<Policy> base, std::size_t window) {
  return std::make_unique<SlidingWindowPolicy>(std::move(base), window);
}

MasterProfile master_condition_profile(const MasterInputs& inputs) {
  const std::size_t horizon = inputs.g1.size();
  if (inputs.g2.size() != horizon) throw ValidationError("master: g1 and g2 lengths differ");
  MasterProfile out;
  out.rho.reserve(horizon);
  double previous = -1.0;
  for (std::size_t i = 0; i < horizon; ++i) {
    const double t = static_cast<double>(i + 1);
    const double scaled = inputs.g1[i] * std::sqrt(t) + inputs.g2[i];  // t rho_t
    const double rho = scaled / t;
    out.rho.push_back(rho);
    // Relative slack so that rho_t == 1/sqrt(t) computed two ways still passes.
    const bool floor_ok = rho * std::sqrt(t) >= 1.0 - 1e-12;
    const bool mono_ok = scaled >= previous;
    out.rho_floor_ok.push_back(floor_ok);
    out.monotone_ok.push_back(mono_ok);
    out.valid = out.valid && floor_ok && mono_ok;
    previous = scaled;

    if (inputs.g1[i] < 0.0 || inputs.g2[i] < 0.0 ||
        (i > 0 && (inputs.g1[i] < inputs.g1[i - 1] || inputs.g2[i] < inputs.g2[i - 1]))) {
      out.inputs_monotone = false;
    }
  }
  out.valid = out.valid && out.inputs_monotone;
  return out;
}

double master_bound(const MasterInputs& inputs) {
  if (inputs.g1.empty() || inputs.g2.size() != inputs.g1.size()) {
    throw ValidationError("master_bound: g1/g2 must be non-empty and equally long");
  }
  const double g1 = inputs.g1.back();
  const double g2 = inputs.g2.back();
  if (!(g1 > 0.0)) throw ValidationError("master_bound: g1_T must be positive");
  const double t = static_cast<double>(inputs.horizon());
  // cbrt keeps perfect cubes exact, e.g. 8^(2/3) = 4.
  const double g1_cbrt = std::cbrt(g1);
  const double t_cbrt = std::cbrt(t);
  const double lead = (g1_cbrt * g1_cbrt + g2 / (g1 * g1_cbrt)) * std::cbrt(inputs.zeta) *
                      std::cbrt(inputs.delta_budget) * t_cbrt * t_cbrt;
  return lead + (g1 + g2 / g1) * std::sqrt(t);
}

MasterInputs gp_ucb_master_inputs(std::span<const double> gamma, const ConfidenceParams& params,
                                  BetaMode mode, double delta_budget) {
  if (gamma.empty()) throw ValidationError("master inputs need a gamma schedule");
  const double horizon = static_cast<double>(gamma.size());
  const double log_term = std::log(horizon / params.delta);
  MasterInputs out;
  out.delta_budget = delta_budget;
  out.g1.reserve(gamma.size());
  out.g2.assign(gamma.size(), 0.0);
  for (double g : gamma) {
    const double beta = mode == BetaMode::hypothetical_one ? 1.0 : beta_t(params, g);
    out.g1.push_back(beta * std::sqrt(g * log_term));
  }
  out.zeta = gamma.back() * std::sqrt(log_term);
  return out;
}

}  // namespace tvkb
