#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tvkb/adversary.hpp"
#include "tvkb/exponents.hpp"
#include "tvkb/policies.hpp"

namespace tvkb {

// ---------------------------------------------------------------------------
// Configuration

/// Budget given directly (`value`) or as T^beta (`beta`); exactly one is set.
struct BudgetSpec {
  BudgetKind kind = BudgetKind::switches;
  std::optional<double> value;
  std::optional<double> beta;

  /// Delta (or L, rounded and clamped to [1, T]) at horizon T.
  double resolve(std::size_t horizon) const;
  /// The number reported in the `beta_or_L` column.
  double label() const noexcept { return beta ? *beta : value.value_or(0.0); }

  friend bool operator==(const BudgetSpec&, const BudgetSpec&) = default;
};

enum class PolicyKind { gp_ucb, restart_gp_ucb, sliding_window_gp_ucb, uniform_random, oracle };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

/// A window or period given as a step count, or as "block" meaning the
/// instance's block length.
struct StepCount {
  std::size_t steps = 0;
  bool block = false;

  std::size_t resolve(const Schedule& schedule) const {
    return block ? schedule.block_length() : steps;
  }
  friend bool operator==(const StepCount&, const StepCount&) = default;
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::gp_ucb;
  std::string label;  // optional display name; defaults to id()
  std::optional<StepCount> restart;  // H, restart-gp-ucb only
  std::optional<StepCount> window;   // W, sliding-window-gp-ucb only
  BetaMode beta_mode = BetaMode::lemma_d3;
  std::optional<double> lambda;
  std::optional<double> sigma;
  std::optional<double> delta;
  std::optional<double> norm_bound;

  /// Stable identifier used in CSV output.
  std::string id() const;

  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

struct ExperimentConfig {
  KernelSpec kernel = KernelSpec::matern(1.5, 1.0);
  std::size_t d = 1;
  double norm_bound = 1.0;  // B
  double sigma = 0.1;
  double lambda = 1.0;
  double delta = 0.01;
  BudgetKind regime = BudgetKind::switches;
  BudgetSpec budget;
  std::vector<std::size_t> horizons;  // T_list
  std::vector<PolicyConfig> policies;
  std::size_t replications = 1;
  std::uint64_t master_seed = 0;
  std::size_t grid_refinement = 0;  // extra uniform points per axis; 0 = centers only
  Calibration calibration;
  std::optional<double> fixed_eps;  // switches regime: bump half-height independent of T

  ConfidenceParams confidence_for(const PolicyConfig& policy) const;
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

// ---------------------------------------------------------------------------
// Episodes

/// Seed layout (all via derive_seed, i.e. chained SplitMix64):
///   instance: derive_seed(master, kInstanceTag, T_index, replication)
///   episode:  derive_seed(master, policy_index, T_index, replication)
inline constexpr std::uint64_t kInstanceTag = 0x696e7374616e6365ULL;  // "instance"
std::uint64_t instance_seed(std::uint64_t master, std::size_t horizon_index,
                            std::size_t replication);
std::uint64_t episode_seed(std::uint64_t master, std::size_t policy_index,
                           std::size_t horizon_index, std::size_t replication);

/// Throws AuditError unless the instance's audit passed.
void require_passing_audit(const EnvironmentInstance& instance);

/// Builds the instance for one (T, replication) cell and checks its audit.
/// Throws AuditError if the realized variation exceeds the budget.
EnvironmentInstance build_instance(const ExperimentConfig& config, std::size_t horizon,
                                   std::uint64_t seed);

/// Bump centers followed by the optional uniform refinement.
std::vector<Point> candidate_grid(const HardClass& cls, std::size_t refinement);

/// Per-step greedy information-gain schedule used by lemma-d3 GP-UCB.
std::shared_ptr<const std::vector<double>> gamma_schedule(const KernelSpec& kernel,
                                                          std::span<const Point> candidates,
                                                          std::size_t horizon, double sigma);

/// Instantiates `policy` for `instance`. `gamma` may be null unless the
/// policy is GP-UCB with lemma-d3 beta.
std::unique_ptr<Policy> make_policy(const ExperimentConfig& config, const PolicyConfig& policy,
                                    const EnvironmentInstance& instance,
                                    std::vector<Point> candidates,
                                    std::shared_ptr<const std::vector<double>> gamma,
                                    std::uint64_t seed);

struct EpisodeResult {
  std::string policy;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  std::vector<double> regret;        // r_t = f_t(x*_t) - f_t(x_t)
  std::vector<std::size_t> chosen;   // candidate index per step
  double cumulative = 0.0;           // R_T
};

/// Plays `policy` against `instance` with N(0, sigma^2) noise keyed by
/// (seed, t). Throws ValidationError if a bump center is missing from the
/// policy's candidate grid and AuditError if the instance failed its audit.
EpisodeResult run_episode(const EnvironmentInstance& instance, Policy& policy, double sigma,
                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Monte Carlo

struct RunRow {
  std::string policy;
  std::string regime;
  double beta_or_l = 0.0;
  std::size_t horizon = 0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  double cum_regret = 0.0;

  friend bool operator==(const RunRow&, const RunRow&) = default;
};

struct AggregateRow {
  std::string policy;
  std::string regime;
  std::size_t horizon = 0;
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
  std::size_t n = 0;

  friend bool operator==(const AggregateRow&, const AggregateRow&) = default;
};

struct MonteCarloResult {
  std::vector<RunRow> runs;            // sorted by (policy index, T, replication)
  std::vector<AggregateRow> aggregate;  // sorted by (policy index, T)
};

/// Runs every (policy, T, replication) episode. Output does not depend on
/// `workers` (0 = hardware concurrency).
MonteCarloResult monte_carlo(const ExperimentConfig& config, std::size_t workers = 0);

std::vector<AggregateRow> aggregate_runs(std::span<const RunRow> runs,
                                         std::span<const std::string> policy_order);

// ---------------------------------------------------------------------------
// Scaling fits

struct ScalingFit {
  double alpha = 0.0;      // slope of log R against log T
  double intercept = 0.0;
  double r_squared = 0.0;
  double stderr_alpha = 0.0;
};

/// Ordinary least squares on (log T, log R). Needs >= 3 pairs, all
/// positive; throws ValidationError otherwise.
ScalingFit fit_exponent(std::span<const std::pair<double, double>> pairs);

// ---------------------------------------------------------------------------
// CSV

void write_runs_csv(std::ostream& out, std::span<const RunRow> rows);
void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows);
std::vector<RunRow> read_runs_csv(std::istream& in);
std::vector<AggregateRow> read_aggregate_csv(std::istream& in);

/// Rows `regime,beta,nu,d,alpha_lower,alpha_upper,gap`.
void write_gaps_csv(std::ostream& out, const GapSweep& sweep);
/// Header `max_gap,argmax_ratio` and one value row.
void write_gap_summary_csv(std::ostream& out, const GapSweep& sweep);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace tvkb
