#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tvkb/hardness.hpp"
#include "tvkb/rng.hpp"

namespace tvkb {

enum class BudgetKind { switches, linf, rkhs };

std::string to_string(BudgetKind kind);
BudgetKind budget_kind_from_string(const std::string& name);

/// Cap on how much the environment may move: at most L - 1 changes for
/// `switches`, total variation Delta for `linf` and `rkhs`.
struct VariationBudget {
  BudgetKind kind = BudgetKind::switches;
  double value = 1.0;

  /// The bound the realized variation is compared against.
  double allowance() const noexcept { return kind == BudgetKind::switches ? value - 1.0 : value; }
};

/// Partition of steps 1..T into c blocks, each holding one hard-class member.
/// Block j covers steps block_bounds[j] + 1 .. block_bounds[j + 1].
struct Schedule {
  std::size_t horizon = 0;
  std::vector<std::size_t> block_bounds;
  std::vector<std::size_t> member_idx;
  std::vector<double> per_block_norm;  // filled in the rkhs regime only

  std::size_t blocks() const noexcept { return member_idx.size(); }
  /// Length of every block but the last.
  std::size_t block_length() const noexcept { return horizon / blocks(); }
  /// 0-based index of the block holding step t (t is 1-based).
  std::size_t block_of(std::size_t t) const;

  nlohmann::json to_json() const;
};

/// First c - 1 blocks get floor(T/c) steps; the last absorbs the remainder.
std::vector<std::size_t> block_bounds(std::size_t horizon, std::size_t blocks);

struct ChangeCost {
  std::size_t step = 0;  // change between f_step and f_{step+1}
  double cost = 0.0;
};

struct AuditReport {
  BudgetKind kind = BudgetKind::switches;
  double realized = 0.0;
  double allowance = 0.0;
  std::vector<double> prefix;       // prefix[t-1] = variation up to step t
  std::vector<ChangeCost> changes;  // one entry per block boundary
  bool certificate_semantics = false;  // rkhs: costs are interpolant lower bounds
  bool passed = false;

  nlohmann::json to_json(bool with_prefix = false) const;
};

/// Construction metadata surfaced to the harness.
struct InstanceFlags {
  bool stationary_regime = false;
  std::string branch;                 // rkhs: "nu<=d" or "nu>d"
  double blocks_small_branch = 0.0;   // rkhs: rounded Delta/(2B)
  double blocks_large_branch = 0.0;   // rkhs: rounded c0 (T Delta^2)^(1/3)
  double height_scale = 1.0;          // rkhs: shrink applied to meet certificates
  double max_member_certificate = 0.0;  // rkhs only

  nlohmann::json to_json() const;
};

/// A T-step block-constant sequence of hard-class members plus its audit.
class EnvironmentInstance {
 public:
  EnvironmentInstance(HardClass cls, Schedule schedule, VariationBudget budget,
                      AuditReport audit, InstanceFlags flags);

  const HardClass& hard_class() const noexcept { return class_; }
  const Schedule& schedule() const noexcept { return schedule_; }
  const VariationBudget& budget() const noexcept { return budget_; }
  const AuditReport& audit() const noexcept { return audit_; }
  const InstanceFlags& flags() const noexcept { return flags_; }
  std::size_t horizon() const noexcept { return schedule_.horizon; }

  /// Index into hard_class() active at step t (1-based).
  std::size_t active_member(std::size_t t) const;
  /// f_t(x).
  double value(std::size_t t, const Point& x) const;

  nlohmann::json to_json(bool with_prefix = false) const;

 private:
  HardClass class_;
  Schedule schedule_;
  VariationBudget budget_;
  AuditReport audit_;
  InstanceFlags flags_;
};

/// At most L - 1 switches: L equal blocks with i.i.d. uniform members.
EnvironmentInstance schedule_switches(std::size_t horizon, std::size_t switches_budget,
                                      const HardClass& cls, SplitMix64& rng);

/// l-infinity budget Delta. Block count
/// c = round(c0 Delta^((2nu+d)/(3nu+d)) T^(nu/(3nu+d))) clamped to [1, T],
/// eps = min(Delta/(4c), eps_max B, eps_for_horizon(T/c)).
EnvironmentInstance schedule_linf(std::size_t horizon, double delta, const KernelSpec& kernel,
                                  double norm_budget, std::size_t d,
                                  const Calibration& calibration, SplitMix64& rng);

/// RKHS budget Delta. nu <= d: c = round(Delta/(2B)); nu > d:
/// c = round(c0 (T Delta^2)^(1/3)); per-block norm min(B, Delta/(2c)).
/// Member heights are shrunk until every member's interpolant certificate
/// is within the per-block norm, so each change costs at most twice that.
/// The kernel must be evaluable.
EnvironmentInstance schedule_rkhs(std::size_t horizon, double delta, const KernelSpec& kernel,
                                  double norm_budget, std::size_t d,
                                  const Calibration& calibration, SplitMix64& rng);

/// Recomputes the realized variation of `instance` under `kind`.
/// linf costs are sup-norm differences on `probe`; rkhs costs are
/// interpolant certificates on `probe`. Switches ignore the probe.
AuditReport audit_variation(const EnvironmentInstance& instance, BudgetKind kind,
                            std::span<const Point> probe);

/// Default probe for the instance's own budget kind.
std::vector<Point> default_probe(const HardClass& cls, BudgetKind kind);

/// Maximizer of f_t and its value 2 eps (t is 1-based).
std::pair<Point, double> oracle_optimum(const EnvironmentInstance& instance, std::size_t t);

}  // namespace tvkb
