#include "tvkb/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tvkb/error.hpp"

namespace tvkb {

std::string to_string(BudgetKind kind) {
  switch (kind) {
    case BudgetKind::switches:
      return "switches";
    case BudgetKind::linf:
      return "linf";
    case BudgetKind::rkhs:
      return "rkhs";
  }
  return "?";
}

BudgetKind budget_kind_from_string(const std::string& name) {
  if (name == "switches") return BudgetKind::switches;
  if (name == "linf") return BudgetKind::linf;
  if (name == "rkhs") return BudgetKind::rkhs;
  throw ValidationError("unknown regime '" + name + "'");
}

std::size_t Schedule::block_of(std::size_t t) const {
  if (t < 1 || t > horizon) throw ValidationError("step out of range");
  // First bound >= t, minus one.
  const auto it = std::lower_bound(block_bounds.begin() + 1, block_bounds.end(), t);
  return static_cast<std::size_t>(it - block_bounds.begin()) - 1;
}

nlohmann::json Schedule::to_json() const {
  nlohmann::json out = {{"T", horizon}, {"block_bounds", block_bounds}, {"member_idx", member_idx}};
  if (!per_block_norm.empty()) out["per_block_norm"] = per_block_norm;
  return out;
}

std::vector<std::size_t> block_bounds(std::size_t horizon, std::size_t blocks) {
  if (blocks < 1 || blocks > horizon) throw ValidationError("block count outside [1, T]");
  const std::size_t len = horizon / blocks;
  std::vector<std::size_t> bounds(blocks + 1);
  for (std::size_t j = 0; j < blocks; ++j) bounds[j] = j * len;
  bounds[blocks] = horizon;
  return bounds;
}

nlohmann::json AuditReport::to_json(bool with_prefix) const {
  nlohmann::json changes_json = nlohmann::json::array();
  for (const auto& c : changes) changes_json.push_back({{"t", c.step}, {"cost", c.cost}});
  nlohmann::json out = {{"kind", tvkb::to_string(kind)},
                        {"realized", realized},
                        {"allowance", allowance},
                        {"passed", passed},
                        {"certificate_semantics", certificate_semantics},
                        {"changes", changes_json}};
  if (with_prefix) out["prefix"] = prefix;
  return out;
}

nlohmann::json InstanceFlags::to_json() const {
  nlohmann::json out = {{"stationary_regime", stationary_regime}};
  if (!branch.empty()) {
    out["branch"] = branch;
    out["blocks_small_branch"] = blocks_small_branch;
    out["blocks_large_branch"] = blocks_large_branch;
    out["height_scale"] = height_scale;
    out["max_member_certificate"] = max_member_certificate;
  }
  return out;
}

EnvironmentInstance::EnvironmentInstance(HardClass cls, Schedule schedule, VariationBudget budget,
                                         AuditReport audit, InstanceFlags flags)
    : class_(std::move(cls)),
      schedule_(std::move(schedule)),
      budget_(budget),
      audit_(std::move(audit)),
      flags_(std::move(flags)) {}

std::size_t EnvironmentInstance::active_member(std::size_t t) const {
  return schedule_.member_idx[schedule_.block_of(t)];
}

double EnvironmentInstance::value(std::size_t t, const Point& x) const {
  return class_.eval(active_member(t), x);
}

nlohmann::json EnvironmentInstance::to_json(bool with_prefix) const {
  return {{"class", class_.to_json()},
          {"schedule", schedule_.to_json()},
          {"budget", {{"kind", to_string(budget_.kind)}, {"value", budget_.value}}},
          {"audit", audit_.to_json(with_prefix)},
          {"flags", flags_.to_json()}};
}

namespace {

Schedule draw_schedule(std::size_t horizon, std::size_t blocks, std::size_t members,
                       SplitMix64& rng) {
  Schedule s;
  s.horizon = horizon;
  s.block_bounds = block_bounds(horizon, blocks);
  s.member_idx.reserve(blocks);
  for (std::size_t j = 0; j < blocks; ++j) s.member_idx.push_back(rng.below(members));
  return s;
}

std::size_t clamp_blocks(double raw, std::size_t horizon) {
  const double rounded = std::round(raw);
  if (!(rounded >= 1.0)) return 1;
  if (rounded >= static_cast<double>(horizon)) return horizon;
  return static_cast<std::size_t>(rounded);
}

// Probe sizes that keep the audit cheap in higher dimensions.
std::size_t probe_per_axis(std::size_t d) {
  const double per = std::floor(std::pow(4096.0, 1.0 / static_cast<double>(d)));
  return std::max<std::size_t>(3, static_cast<std::size_t>(per));
}

AuditReport finish_audit(BudgetKind kind, double allowance, std::size_t horizon,
                         std::vector<ChangeCost> changes, bool certificate) {
  AuditReport report;
  report.kind = kind;
  report.allowance = allowance;
  report.certificate_semantics = certificate;
  report.prefix.assign(horizon, 0.0);
  double running = 0.0;
  std::size_t next = 0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    while (next < changes.size() && changes[next].step == t) running += changes[next++].cost;
    report.prefix[t - 1] = running;
  }
  report.realized = running;
  report.changes = std::move(changes);
  report.passed = report.realized <= report.allowance;
  return report;
}

void check_horizon(std::size_t horizon) {
  if (horizon < 1) throw ValidationError("horizon T must be >= 1");
}

void check_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("budget Delta must be > 0");
}

}  // namespace

std::vector<Point> default_probe(const HardClass& cls, BudgetKind kind) {
  if (kind == BudgetKind::rkhs) return support_stencil(cls);
  return audit_probe(cls, probe_per_axis(cls.dim()));
}

AuditReport audit_variation(const EnvironmentInstance& instance, BudgetKind kind,
                            std::span<const Point> probe) {
  const Schedule& s = instance.schedule();
  const HardClass& cls = instance.hard_class();
  const double allowance = VariationBudget{kind, instance.budget().value}.allowance();

  std::vector<ChangeCost> changes;
  changes.reserve(s.blocks());

  if (kind == BudgetKind::switches) {
    for (std::size_t j = 0; j + 1 < s.blocks(); ++j) {
      const double cost = s.member_idx[j] != s.member_idx[j + 1] ? 1.0 : 0.0;
      changes.push_back({s.block_bounds[j + 1], cost});
    }
    return finish_audit(kind, allowance, s.horizon, std::move(changes), false);
  }

  if (probe.empty()) throw ValidationError("audit_variation: empty probe");

  // Member values on the probe, computed once.
  const auto p = static_cast<Eigen::Index>(probe.size());
  std::map<std::size_t, Eigen::VectorXd> values;
  for (auto m : s.member_idx) {
    if (values.contains(m)) continue;
    Eigen::VectorXd v(p);
    for (Eigen::Index i = 0; i < p; ++i) v[i] = cls.eval(m, probe[static_cast<std::size_t>(i)]);
    values.emplace(m, std::move(v));
  }

  std::optional<InterpolantNorm> certifier;
  if (kind == BudgetKind::rkhs) {
    certifier.emplace(cls.kernel(), std::vector<Point>(probe.begin(), probe.end()));
  }

  std::map<std::pair<std::size_t, std::size_t>, double> memo;
  for (std::size_t j = 0; j + 1 < s.blocks(); ++j) {
    const std::size_t a = s.member_idx[j];
    const std::size_t b = s.member_idx[j + 1];
    double cost = 0.0;
    if (a != b) {
      const auto key = std::minmax(a, b);
      auto it = memo.find(key);
      if (it == memo.end()) {
        const Eigen::VectorXd diff = values.at(b) - values.at(a);
        const double c = kind == BudgetKind::linf ? diff.cwiseAbs().maxCoeff() : (*certifier)(diff);
        it = memo.emplace(key, c).first;
      }
      cost = it->second;
    }
    changes.push_back({s.block_bounds[j + 1], cost});
  }
  return finish_audit(kind, allowance, s.horizon, std::move(changes), kind == BudgetKind::rkhs);
}

EnvironmentInstance schedule_switches(std::size_t horizon, std::size_t switches_budget,
                                      const HardClass& cls, SplitMix64& rng) {
  check_horizon(horizon);
  if (switches_budget < 1 || switches_budget > horizon) {
    throw ValidationError("switch budget L must lie in [1, T]");
  }
  Schedule s = draw_schedule(horizon, switches_budget, cls.size(), rng);
  const VariationBudget budget{BudgetKind::switches, static_cast<double>(switches_budget)};
  InstanceFlags flags;
  flags.stationary_regime = switches_budget == 1;
  EnvironmentInstance tmp(cls, std::move(s), budget, {}, flags);
  AuditReport audit = audit_variation(tmp, BudgetKind::switches, {});
  return {cls, tmp.schedule(), budget, std::move(audit), std::move(flags)};
}

EnvironmentInstance schedule_linf(std::size_t horizon, double delta, const KernelSpec& kernel,
                                  double norm_budget, std::size_t d,
                                  const Calibration& calibration, SplitMix64& rng) {
  check_horizon(horizon);
  check_delta(delta);
  const double nu = kernel.smoothness();
  const double r = nu / static_cast<double>(d);
  const double tt = static_cast<double>(horizon);

  // Exponents written in r = nu/d so that nu = inf takes the limit.
  const double delta_exp = std::isinf(r) ? 2.0 / 3.0 : (2.0 * r + 1.0) / (3.0 * r + 1.0);
  const double horizon_exp = std::isinf(r) ? 1.0 / 3.0 : r / (3.0 * r + 1.0);
  const std::size_t c = clamp_blocks(
      calibration.c0_blocks * std::pow(delta, delta_exp) * std::pow(tt, horizon_exp), horizon);

  InstanceFlags flags;
  flags.stationary_regime = c == 1;

  const double tau = static_cast<double>(horizon / c);
  const double eps_cap = calibration.eps_ratio_max * norm_budget;
  const double eps_tau =
      epsilon_for_horizon(tau, norm_budget, nu, d, calibration.c0_eps, calibration.eps_ratio_max);
  const double eps = flags.stationary_regime ? eps_tau
                                             : std::min({delta / (4.0 * static_cast<double>(c)),
                                                         eps_cap, eps_tau});

  HardClass cls(kernel, d, norm_budget, eps, calibration);
  Schedule s = draw_schedule(horizon, c, cls.size(), rng);
  const VariationBudget budget{BudgetKind::linf, delta};
  EnvironmentInstance tmp(cls, std::move(s), budget, {}, flags);
  const auto probe = default_probe(cls, BudgetKind::linf);
  AuditReport audit = audit_variation(tmp, BudgetKind::linf, probe);
  return {std::move(cls), tmp.schedule(), budget, std::move(audit), std::move(flags)};
}

EnvironmentInstance schedule_rkhs(std::size_t horizon, double delta, const KernelSpec& kernel,
                                  double norm_budget, std::size_t d,
                                  const Calibration& calibration, SplitMix64& rng) {
  check_horizon(horizon);
  check_delta(delta);
  if (!kernel.evaluable()) {
    throw ValidationError("rkhs regime needs an evaluable kernel for certificates");
  }
  const double nu = kernel.smoothness();
  const double dd = static_cast<double>(d);
  const double tt = static_cast<double>(horizon);

  InstanceFlags flags;
  flags.blocks_small_branch = std::round(delta / (2.0 * norm_budget));
  flags.blocks_large_branch = std::round(calibration.c0_blocks * std::cbrt(tt * delta * delta));
  const bool small_branch = nu <= dd;
  flags.branch = small_branch ? "nu<=d" : "nu>d";
  const std::size_t c = clamp_blocks(
      small_branch ? flags.blocks_small_branch : flags.blocks_large_branch, horizon);
  flags.stationary_regime = c == 1;

  // A single block never changes, so it may use the full norm budget.
  const double block_norm =
      flags.stationary_regime ? norm_budget
                              : std::min(norm_budget, delta / (2.0 * static_cast<double>(c)));
  const double tau = static_cast<double>(horizon / c);
  const double eps =
      epsilon_for_horizon(tau, block_norm, nu, d, calibration.c0_eps, calibration.eps_ratio_max);

  HardClass cls(kernel, d, block_norm, eps, calibration);
  const auto probe = default_probe(cls, BudgetKind::rkhs);
  const InterpolantNorm certifier(kernel, probe);
  const MemberCertificate certs = certify_members(cls, certifier);
  if (certs.max_norm > block_norm) {
    // Heights scale the certificate linearly; the 1e-9 margin absorbs rounding.
    flags.height_scale = block_norm / certs.max_norm * (1.0 - 1e-9);
    cls = cls.scaled(flags.height_scale);
  }
  flags.max_member_certificate = certs.max_norm * flags.height_scale;

  Schedule s = draw_schedule(horizon, c, cls.size(), rng);
  s.per_block_norm.assign(c, block_norm);
  const VariationBudget budget{BudgetKind::rkhs, delta};
  EnvironmentInstance tmp(cls, std::move(s), budget, {}, flags);
  AuditReport audit = audit_variation(tmp, BudgetKind::rkhs, probe);
  return {std::move(cls), tmp.schedule(), budget, std::move(audit), std::move(flags)};
}

std::pair<Point, double> oracle_optimum(const EnvironmentInstance& instance, std::size_t t) {
  const std::size_t m = instance.active_member(t);
  return {instance.hard_class().centers()[m], instance.hard_class().peak()};
}

}  // namespace tvkb
