#include "tvkb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "tvkb/error.hpp"

namespace tvkb {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

double BudgetSpec::resolve(std::size_t horizon) const {
  const double tt = static_cast<double>(horizon);
  const double raw = beta ? std::pow(tt, *beta) : value.value_or(0.0);
  if (kind != BudgetKind::switches) return raw;
  return std::clamp(std::round(raw), 1.0, tt);
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::gp_ucb: return "gp-ucb";
    case PolicyKind::restart_gp_ucb: return "restart-gp-ucb";
    case PolicyKind::sliding_window_gp_ucb: return "sliding-window-gp-ucb";
    case PolicyKind::uniform_random: return "uniform-random";
    case PolicyKind::oracle: return "oracle";
  }
  return "gp-ucb";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  for (auto k : {PolicyKind::gp_ucb, PolicyKind::restart_gp_ucb,
                 PolicyKind::sliding_window_gp_ucb, PolicyKind::uniform_random,
                 PolicyKind::oracle}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown policy kind '" + name + "'");
}

namespace {

bool uses_gp(PolicyKind kind) {
  return kind == PolicyKind::gp_ucb || kind == PolicyKind::restart_gp_ucb ||
         kind == PolicyKind::sliding_window_gp_ucb;
}

std::string step_count_text(const StepCount& s) {
  return s.block ? "block" : std::to_string(s.steps);
}

}  // namespace

std::string PolicyConfig::id() const {
  if (!label.empty()) return label;
  std::string out = to_string(kind);
  std::vector<std::string> args;
  if (kind == PolicyKind::restart_gp_ucb && restart) args.push_back("H=" + step_count_text(*restart));
  if (kind == PolicyKind::sliding_window_gp_ucb && window) {
    args.push_back("W=" + step_count_text(*window));
  }
  if (uses_gp(kind) && beta_mode == BetaMode::hypothetical_one) args.push_back("beta=1");
  if (!args.empty()) {
    out += '(';
    for (std::size_t i = 0; i < args.size(); ++i) out += (i ? ";" : "") + args[i];
    out += ')';
  }
  return out;
}

ConfidenceParams ExperimentConfig::confidence_for(const PolicyConfig& policy) const {
  ConfidenceParams p;
  p.norm_bound = policy.norm_bound.value_or(norm_bound);
  p.sigma = policy.sigma.value_or(sigma);
  p.delta = policy.delta.value_or(delta);
  p.lambda = policy.lambda.value_or(lambda);
  return p;
}

namespace {

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ValidationError("config key '" + key + "': " + what);
}

}  // namespace

void ExperimentConfig::validate() const {
  require(kernel.lengthscale > 0.0 && std::isfinite(kernel.lengthscale), "kernel.lengthscale",
          "must be positive");
  if (kernel.family == KernelFamily::matern) {
    require(kernel.evaluable(), "kernel.nu", "must be one of 0.5, 1.5, 2.5, 3.5");
  }
  require(d >= 1, "d", "must be >= 1");
  require(norm_bound > 0.0 && std::isfinite(norm_bound), "B", "must be positive");
  require(sigma > 0.0 && std::isfinite(sigma), "sigma", "must be positive");
  require(lambda > 0.0 && std::isfinite(lambda), "lambda", "must be positive");
  require(delta > 0.0 && delta <= 1.0, "delta", "must lie in (0, 1]");
  require(budget.kind == regime, "budget.kind", "must match 'regime'");
  require(budget.value.has_value() != budget.beta.has_value(), "budget",
          "exactly one of 'value' and 'beta' is required");
  if (budget.beta) {
    require(*budget.beta >= 0.0 && *budget.beta <= 1.0, "budget.beta", "must lie in [0, 1]");
  } else if (regime == BudgetKind::switches) {
    require(*budget.value >= 1.0, "budget.value", "switch budget L must be >= 1");
  } else {
    require(*budget.value > 0.0 && std::isfinite(*budget.value), "budget.value",
            "must be positive");
  }
  require(!horizons.empty(), "T_list", "must not be empty");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    require(horizons[i] >= 1, "T_list", "horizons must be >= 1");
    require(i == 0 || horizons[i] > horizons[i - 1], "T_list", "must be strictly increasing");
  }
  require(!policies.empty(), "policies", "must not be empty");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const auto& p = policies[i];
    const std::string key = "policies[" + std::to_string(i) + "]";
    require(p.kind != PolicyKind::restart_gp_ucb || p.restart.has_value(), key + ".H",
            "required for restart-gp-ucb");
    require(p.kind != PolicyKind::sliding_window_gp_ucb || p.window.has_value(), key + ".W",
            "required for sliding-window-gp-ucb");
    require(!p.restart || p.restart->block || p.restart->steps >= 1, key + ".H", "must be >= 1");
    require(!p.window || p.window->block || p.window->steps >= 1, key + ".W", "must be >= 1");
    require(p.label.find_first_of(",\"\n\r") == std::string::npos, key + ".label",
            "must not contain commas, quotes or newlines");
    const auto c = confidence_for(p);
    require(c.lambda > 0.0, key + ".lambda", "must be positive");
    require(c.sigma > 0.0, key + ".sigma", "must be positive");
    require(c.delta > 0.0 && c.delta <= 1.0, key + ".delta", "must lie in (0, 1]");
    require(c.norm_bound > 0.0, key + ".B", "must be positive");
    require(ids.insert(p.id()).second, key, "duplicate policy id '" + p.id() + "'");
  }
  require(replications >= 1, "replications", "must be >= 1");
  require(calibration.c0_width > 0.0, "calibration.c0_width", "must be positive");
  require(calibration.c0_eps > 0.0, "calibration.c0_eps", "must be positive");
  require(calibration.c0_horizon > 0.0, "calibration.c0_horizon", "must be positive");
  require(calibration.c0_blocks > 0.0, "calibration.c0_blocks", "must be positive");
  require(calibration.eps_ratio_max > 0.0, "calibration.eps_ratio_max", "must be positive");
  if (fixed_eps) {
    require(*fixed_eps > 0.0, "calibration.eps", "must be positive");
    require(regime == BudgetKind::switches, "calibration.eps",
            "only supported in the switches regime");
  }
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw ValidationError("config key '" + (where.empty() ? std::string("<root>") : where) +
                          "': expected an object");
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || item.key() == a;
    if (!known) {
      throw ValidationError("unknown config key '" + (where.empty() ? "" : where + ".") +
                            item.key() + "'");
    }
  }
}

std::string join_key(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

double number_at(const json& obj, const std::string& where, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError("config key '" + join_key(where, key) + "': expected a number");
  return v.get<double>();
}

std::uint64_t unsigned_at(const json& obj, const std::string& where, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned()) {
    throw ValidationError("config key '" + join_key(where, key) +
                          "': expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string string_at(const json& obj, const std::string& where, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ValidationError("config key '" + join_key(where, key) + "': expected a string");
  return v.get<std::string>();
}

template <typename F>
auto with_key(const std::string& key, F&& parse) {
  try {
    return parse();
  } catch (const std::exception& e) {
    const std::string what = e.what();
    if (what.starts_with("config key '")) throw;
    throw ValidationError("config key '" + key + "': " + what);
  }
}

StepCount step_count_at(const json& obj, const std::string& where, const std::string& key) {
  const auto& v = obj.at(key);
  if (v.is_string()) {
    if (v.get<std::string>() != "block") {
      throw ValidationError("config key '" + join_key(where, key) +
                            "': expected an integer or \"block\"");
    }
    return {0, true};
  }
  return {static_cast<std::size_t>(unsigned_at(obj, where, key)), false};
}

PolicyConfig policy_from_json(const json& j, const std::string& where) {
  check_keys(j, where, {"kind", "label", "H", "W", "beta_mode", "lambda", "sigma", "delta", "B"});
  PolicyConfig p;
  if (!j.contains("kind")) throw ValidationError("config key '" + where + ".kind': missing");
  p.kind = with_key(where + ".kind", [&] { return policy_kind_from_string(string_at(j, where, "kind")); });
  if (j.contains("label")) p.label = string_at(j, where, "label");
  if (j.contains("H")) {
    require(p.kind == PolicyKind::restart_gp_ucb, where + ".H", "only valid for restart-gp-ucb");
    p.restart = step_count_at(j, where, "H");
  }
  if (j.contains("W")) {
    require(p.kind == PolicyKind::sliding_window_gp_ucb, where + ".W",
            "only valid for sliding-window-gp-ucb");
    p.window = step_count_at(j, where, "W");
  }
  if (j.contains("beta_mode")) {
    p.beta_mode = with_key(where + ".beta_mode",
                           [&] { return beta_mode_from_string(string_at(j, where, "beta_mode")); });
  }
  if (j.contains("lambda")) p.lambda = number_at(j, where, "lambda");
  if (j.contains("sigma")) p.sigma = number_at(j, where, "sigma");
  if (j.contains("delta")) p.delta = number_at(j, where, "delta");
  if (j.contains("B")) p.norm_bound = number_at(j, where, "B");
  return p;
}

json step_count_json(const StepCount& s) {
  return s.block ? json("block") : json(s.steps);
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, "", {"kernel", "d", "B", "sigma", "lambda", "delta", "regime", "budget", "T_list",
                     "policies", "replications", "master_seed", "grid", "calibration"});
  ExperimentConfig c;

  if (j.contains("kernel")) {
    const auto& k = j.at("kernel");
    check_keys(k, "kernel", {"family", "nu", "lengthscale"});
    const auto family = k.contains("family")
                            ? with_key("kernel.family", [&] {
                                return kernel_family_from_string(string_at(k, "kernel", "family"));
                              })
                            : KernelFamily::matern;
    const double ell = k.contains("lengthscale") ? number_at(k, "kernel", "lengthscale") : 1.0;
    if (family == KernelFamily::squared_exponential) {
      if (k.contains("nu")) throw ValidationError("config key 'kernel.nu': not used by the se kernel");
      c.kernel = KernelSpec::squared_exponential(ell);
    } else {
      c.kernel = KernelSpec::matern(k.contains("nu") ? number_at(k, "kernel", "nu") : 1.5, ell);
    }
  }
  if (j.contains("d")) c.d = static_cast<std::size_t>(unsigned_at(j, "", "d"));
  if (j.contains("B")) c.norm_bound = number_at(j, "", "B");
  if (j.contains("sigma")) c.sigma = number_at(j, "", "sigma");
  if (j.contains("lambda")) c.lambda = number_at(j, "", "lambda");
  if (j.contains("delta")) c.delta = number_at(j, "", "delta");

  std::optional<BudgetKind> regime;
  if (j.contains("regime")) {
    regime = with_key("regime", [&] { return budget_kind_from_string(string_at(j, "", "regime")); });
  }
  if (!j.contains("budget")) throw ValidationError("config key 'budget': missing");
  {
    const auto& b = j.at("budget");
    check_keys(b, "budget", {"kind", "value", "beta"});
    if (b.contains("kind")) {
      c.budget.kind =
          with_key("budget.kind", [&] { return budget_kind_from_string(string_at(b, "budget", "kind")); });
    } else if (regime) {
      c.budget.kind = *regime;
    } else {
      throw ValidationError("config key 'regime': missing (and no budget.kind)");
    }
    if (b.contains("value")) c.budget.value = number_at(b, "budget", "value");
    if (b.contains("beta")) c.budget.beta = number_at(b, "budget", "beta");
  }
  c.regime = regime.value_or(c.budget.kind);

  if (!j.contains("T_list")) throw ValidationError("config key 'T_list': missing");
  {
    const auto& t = j.at("T_list");
    if (!t.is_array()) throw ValidationError("config key 'T_list': expected an array");
    for (const auto& v : t) {
      if (!v.is_number_unsigned()) {
        throw ValidationError("config key 'T_list': expected positive integers");
      }
      c.horizons.push_back(v.get<std::size_t>());
    }
  }
  if (!j.contains("policies")) throw ValidationError("config key 'policies': missing");
  {
    const auto& ps = j.at("policies");
    if (!ps.is_array()) throw ValidationError("config key 'policies': expected an array");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      c.policies.push_back(policy_from_json(ps[i], "policies[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("replications")) c.replications = unsigned_at(j, "", "replications");
  if (j.contains("master_seed")) c.master_seed = unsigned_at(j, "", "master_seed");
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    check_keys(g, "grid", {"refinement"});
    if (g.contains("refinement")) c.grid_refinement = unsigned_at(g, "grid", "refinement");
  }
  if (j.contains("calibration")) {
    const auto& cal = j.at("calibration");
    check_keys(cal, "calibration",
               {"c0_width", "c0_eps", "c0_horizon", "c0_blocks", "eps_ratio_max", "eps"});
    auto& k = c.calibration;
    if (cal.contains("c0_width")) k.c0_width = number_at(cal, "calibration", "c0_width");
    if (cal.contains("c0_eps")) k.c0_eps = number_at(cal, "calibration", "c0_eps");
    if (cal.contains("c0_horizon")) k.c0_horizon = number_at(cal, "calibration", "c0_horizon");
    if (cal.contains("c0_blocks")) k.c0_blocks = number_at(cal, "calibration", "c0_blocks");
    if (cal.contains("eps_ratio_max")) k.eps_ratio_max = number_at(cal, "calibration", "eps_ratio_max");
    if (cal.contains("eps")) c.fixed_eps = number_at(cal, "calibration", "eps");
  }
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  json kernel{{"family", to_string(c.kernel.family)}, {"lengthscale", c.kernel.lengthscale}};
  if (c.kernel.family == KernelFamily::matern) kernel["nu"] = c.kernel.nu;
  j["kernel"] = kernel;
  j["d"] = c.d;
  j["B"] = c.norm_bound;
  j["sigma"] = c.sigma;
  j["lambda"] = c.lambda;
  j["delta"] = c.delta;
  j["regime"] = to_string(c.regime);
  json budget{{"kind", to_string(c.budget.kind)}};
  if (c.budget.value) budget["value"] = *c.budget.value;
  if (c.budget.beta) budget["beta"] = *c.budget.beta;
  j["budget"] = budget;
  j["T_list"] = c.horizons;
  json policies = json::array();
  for (const auto& p : c.policies) {
    json pj{{"kind", to_string(p.kind)}};
    if (!p.label.empty()) pj["label"] = p.label;
    if (p.restart) pj["H"] = step_count_json(*p.restart);
    if (p.window) pj["W"] = step_count_json(*p.window);
    if (uses_gp(p.kind)) pj["beta_mode"] = to_string(p.beta_mode);
    if (p.lambda) pj["lambda"] = *p.lambda;
    if (p.sigma) pj["sigma"] = *p.sigma;
    if (p.delta) pj["delta"] = *p.delta;
    if (p.norm_bound) pj["B"] = *p.norm_bound;
    policies.push_back(pj);
  }
  j["policies"] = policies;
  j["replications"] = c.replications;
  j["master_seed"] = c.master_seed;
  j["grid"] = {{"refinement", c.grid_refinement}};
  json cal{{"c0_width", c.calibration.c0_width},
           {"c0_eps", c.calibration.c0_eps},
           {"c0_horizon", c.calibration.c0_horizon},
           {"c0_blocks", c.calibration.c0_blocks},
           {"eps_ratio_max", c.calibration.eps_ratio_max}};
  if (c.fixed_eps) cal["eps"] = *c.fixed_eps;
  j["calibration"] = cal;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  write_text_file(path, to_json(config).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Episodes

std::uint64_t instance_seed(std::uint64_t master, std::size_t horizon_index,
                            std::size_t replication) {
  return derive_seed(master, kInstanceTag, horizon_index, replication);
}

std::uint64_t episode_seed(std::uint64_t master, std::size_t policy_index,
                           std::size_t horizon_index, std::size_t replication) {
  return derive_seed(master, policy_index, horizon_index, replication);
}

void require_passing_audit(const EnvironmentInstance& instance) {
  const auto& audit = instance.audit();
  if (!audit.passed || audit.realized > audit.allowance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "instance audit failed: realized " << to_string(audit.kind) << " variation "
        << audit.realized << " exceeds budget " << audit.allowance;
    throw AuditError(msg.str());
  }
}

EnvironmentInstance build_instance(const ExperimentConfig& config, std::size_t horizon,
                                   std::uint64_t seed) {
  SplitMix64 rng(seed);
  const double budget = config.budget.resolve(horizon);
  const auto& cal = config.calibration;

  auto instance = [&]() -> EnvironmentInstance {
    switch (config.regime) {
      case BudgetKind::switches: {
        const auto switches = static_cast<std::size_t>(budget);
        const double tau = static_cast<double>(horizon) / static_cast<double>(switches);
        const double eps =
            config.fixed_eps ? *config.fixed_eps
                             : epsilon_for_horizon(std::max(tau, 1.0), config.norm_bound,
                                                   config.kernel.smoothness(), config.d,
                                                   cal.c0_eps, cal.eps_ratio_max);
        const HardClass cls(config.kernel, config.d, config.norm_bound, eps, cal);
        return schedule_switches(horizon, switches, cls, rng);
      }
      case BudgetKind::linf:
        return schedule_linf(horizon, budget, config.kernel, config.norm_bound, config.d, cal, rng);
      case BudgetKind::rkhs:
        return schedule_rkhs(horizon, budget, config.kernel, config.norm_bound, config.d, cal, rng);
    }
    throw ValidationError("unknown regime");
  }();

  require_passing_audit(instance);
  return instance;
}

std::vector<Point> candidate_grid(const HardClass& cls, std::size_t refinement) {
  std::vector<Point> out = cls.centers();
  if (refinement > 0) {
    auto extra = uniform_grid(cls.dim(), refinement);
    out.insert(out.end(), std::make_move_iterator(extra.begin()),
               std::make_move_iterator(extra.end()));
  }
  return out;
}

std::shared_ptr<const std::vector<double>> gamma_schedule(const KernelSpec& kernel,
                                                          std::span<const Point> candidates,
                                                          std::size_t horizon, double sigma) {
  auto g = greedy_info_gain(kernel, candidates, horizon, sigma);
  return std::make_shared<const std::vector<double>>(std::move(g.prefix));
}

std::unique_ptr<Policy> make_policy(const ExperimentConfig& config, const PolicyConfig& policy,
                                    const EnvironmentInstance& instance,
                                    std::vector<Point> candidates,
                                    std::shared_ptr<const std::vector<double>> gamma,
                                    std::uint64_t seed) {
  switch (policy.kind) {
    case PolicyKind::uniform_random:
      return std::make_unique<UniformRandomPolicy>(std::move(candidates),
                                                   instance.hard_class().size(), seed);
    case PolicyKind::oracle: {
      const Schedule schedule = instance.schedule();
      // Candidates start with the centers, so member i sits at index i.
      return std::make_unique<OraclePolicy>(
          std::move(candidates),
          [schedule](std::size_t t) { return schedule.member_idx[schedule.block_of(t)]; });
    }
    default:
      break;
  }
  auto base = std::make_unique<GpUcbPolicy>(config.kernel, std::move(candidates),
                                            config.confidence_for(policy), policy.beta_mode,
                                            std::move(gamma));
  if (policy.kind == PolicyKind::restart_gp_ucb) {
    return restart_wrapper(std::move(base), policy.restart->resolve(instance.schedule()));
  }
  if (policy.kind == PolicyKind::sliding_window_gp_ucb) {
    return sliding_window_wrapper(std::move(base), policy.window->resolve(instance.schedule()));
  }
  return base;
}

namespace {

bool same_point(const Point& a, const Point& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

void check_centers_available(const HardClass& cls, const std::vector<Point>& candidates) {
  const auto& centers = cls.centers();
  bool prefix = candidates.size() >= centers.size();
  for (std::size_t i = 0; prefix && i < centers.size(); ++i) {
    prefix = same_point(centers[i], candidates[i]);
  }
  if (prefix) return;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const bool found = std::any_of(candidates.begin(), candidates.end(),
                                   [&](const Point& p) { return same_point(p, centers[i]); });
    if (!found) {
      throw ValidationError("policy candidate grid is missing bump center " + std::to_string(i));
    }
  }
}

}  // namespace

EpisodeResult run_episode(const EnvironmentInstance& instance, Policy& policy, double sigma,
                          std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ValidationError("run_episode: sigma must be non-negative");
  require_passing_audit(instance);
  const auto& cls = instance.hard_class();
  const auto& candidates = policy.candidates();
  check_centers_available(cls, candidates);

  const std::size_t horizon = instance.horizon();
  EpisodeResult out;
  out.policy = policy.name();
  out.horizon = horizon;
  out.seed = seed;
  out.regret.reserve(horizon);
  out.chosen.reserve(horizon);

  const double peak = cls.peak();  // every f_t peaks at 2 eps on a center
  for (std::size_t t = 1; t <= horizon; ++t) {
    const std::size_t idx = policy.select(t);
    if (idx >= candidates.size()) throw NumericError("policy selected an index outside its grid");
    const double f = instance.value(t, candidates[idx]);
    const double y = f + sigma * counter_normal(seed, t);
    policy.observe(t, {idx, y});
    const double r = peak - f;
    out.regret.push_back(r);
    out.chosen.push_back(idx);
    out.cumulative += r;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo

std::vector<AggregateRow> aggregate_runs(std::span<const RunRow> runs,
                                         std::span<const std::string> policy_order) {
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const RunRow*>> groups;
  for (const auto& row : runs) {
    const auto it = std::find(policy_order.begin(), policy_order.end(), row.policy);
    if (it == policy_order.end()) {
      throw ValidationError("aggregate: policy '" + row.policy + "' not in the policy list");
    }
    groups[{static_cast<std::size_t>(it - policy_order.begin()), row.horizon}].push_back(&row);
  }
  std::vector<AggregateRow> out;
  out.reserve(groups.size());
  for (auto& [key, rows] : groups) {
    std::sort(rows.begin(), rows.end(),
              [](const RunRow* a, const RunRow* b) { return a->replication < b->replication; });
    AggregateRow agg;
    agg.policy = policy_order[key.first];
    agg.regime = rows.front()->regime;
    agg.horizon = key.second;
    agg.n = rows.size();
    double sum = 0.0;
    for (const auto* r : rows) sum += r->cum_regret;
    agg.mean_regret = sum / static_cast<double>(agg.n);
    if (agg.n > 1) {
      double ss = 0.0;
      for (const auto* r : rows) ss += (r->cum_regret - agg.mean_regret) * (r->cum_regret - agg.mean_regret);
      agg.stderr_regret = std::sqrt(ss / static_cast<double>(agg.n - 1) / static_cast<double>(agg.n));
    }
    out.push_back(std::move(agg));
  }
  return out;
}

MonteCarloResult monte_carlo(const ExperimentConfig& config, std::size_t workers) {
  config.validate();
  const std::size_t n_t = config.horizons.size();
  const std::size_t n_p = config.policies.size();
  const std::size_t reps = config.replications;

  std::vector<std::string> ids;
  for (const auto& p : config.policies) ids.push_back(p.id());

  // The hard class depends only on T, so replication 0's grid serves every
  // replication's information-gain schedule.
  std::vector<std::vector<std::shared_ptr<const std::vector<double>>>> gammas(
      n_t, std::vector<std::shared_ptr<const std::vector<double>>>(n_p));
  for (std::size_t ti = 0; ti < n_t; ++ti) {
    std::map<double, std::shared_ptr<const std::vector<double>>> by_sigma;
    std::optional<std::vector<Point>> grid;
    for (std::size_t pi = 0; pi < n_p; ++pi) {
      const auto& p = config.policies[pi];
      if (!uses_gp(p.kind) || p.beta_mode != BetaMode::lemma_d3) continue;
      if (!grid) {
        const auto inst = build_instance(config, config.horizons[ti],
                                         instance_seed(config.master_seed, ti, 0));
        grid = candidate_grid(inst.hard_class(), config.grid_refinement);
      }
      const double s = config.confidence_for(p).sigma;
      auto& slot = by_sigma[s];
      if (!slot) slot = gamma_schedule(config.kernel, *grid, config.horizons[ti], s);
      gammas[ti][pi] = slot;
    }
  }

  MonteCarloResult result;
  result.runs.resize(n_p * n_t * reps);
  const std::string regime = to_string(config.regime);
  const double label = config.budget.label();

  const std::size_t units = n_t * reps;
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_unit = units;
  std::exception_ptr error;

  auto work = [&] {
    for (;;) {
      const std::size_t u = next.fetch_add(1);
      if (u >= units) return;
      const std::size_t ti = u / reps;
      const std::size_t rep = u % reps;
      try {
        const std::size_t horizon = config.horizons[ti];
        const auto instance =
            build_instance(config, horizon, instance_seed(config.master_seed, ti, rep));
        const auto grid = candidate_grid(instance.hard_class(), config.grid_refinement);
        for (std::size_t pi = 0; pi < n_p; ++pi) {
          const auto& pc = config.policies[pi];
          const std::uint64_t seed = episode_seed(config.master_seed, pi, ti, rep);
          auto policy = make_policy(config, pc, instance, grid, gammas[ti][pi], derive_seed(seed, 1));
          const auto ep = run_episode(instance, *policy, config.confidence_for(pc).sigma, seed);
          result.runs[(pi * n_t + ti) * reps + rep] =
              RunRow{ids[pi], regime, label, horizon, rep, seed, ep.cumulative};
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (u < error_unit) {
          error_unit = u;
          error = std::current_exception();
        }
      }
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, units);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);

  result.aggregate = aggregate_runs(result.runs, ids);
  return result;
}

// ---------------------------------------------------------------------------
// Scaling fits

ScalingFit fit_exponent(std::span<const std::pair<double, double>> pairs) {
  if (pairs.size() < 3) throw ValidationError("fit_exponent: need at least 3 (T, R) pairs");
  const double n = static_cast<double>(pairs.size());
  std::vector<double> xs, ys;
  for (const auto& [t, r] : pairs) {
    if (!(t > 0.0) || !(r > 0.0) || !std::isfinite(t) || !std::isfinite(r)) {
      throw ValidationError("fit_exponent: T and R must be positive and finite");
    }
    xs.push_back(std::log(t));
    ys.push_back(std::log(r));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("fit_exponent: need at least two distinct T");
  ScalingFit fit;
  fit.alpha = sxy / sxx;
  fit.intercept = my - fit.alpha * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.intercept + fit.alpha * xs[i]);
    ssr += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  fit.stderr_alpha = std::sqrt(ssr / (n - 2.0) / sxx);
  return fit;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr const char* kRunsHeader = "policy,regime,beta_or_L,T,replication,seed,cum_regret";
constexpr const char* kAggregateHeader = "policy,regime,T,mean_regret,stderr,n";
constexpr const char* kGapsHeader = "regime,beta,nu,d,alpha_lower,alpha_upper,gap";

// Shortest form that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const char* column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw ValidationError(std::string("csv column '") + column + "': bad number '" + s + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& s, const char* column) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || s.front() == '-') {
    throw ValidationError(std::string("csv column '") + column + "': bad integer '" + s + "'");
  }
  return v;
}

std::vector<std::vector<std::string>> read_table(std::istream& in, const char* header,
                                                 std::size_t columns) {
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw ValidationError(std::string("csv: expected header '") + header + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != columns) {
      throw ValidationError("csv: row has " + std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(columns));
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

void write_runs_csv(std::ostream& out, std::span<const RunRow> rows) {
  out << kRunsHeader << '\n';
  for (const auto& r : rows) {
    out << r.policy << ',' << r.regime << ',' << fmt(r.beta_or_l) << ',' << r.horizon << ','
        << r.replication << ',' << r.seed << ',' << fmt(r.cum_regret) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows) {
  out << kAggregateHeader << '\n';
  for (const auto& r : rows) {
    out << r.policy << ',' << r.regime << ',' << r.horizon << ',' << fmt(r.mean_regret) << ','
        << fmt(r.stderr_regret) << ',' << r.n << '\n';
  }
}

std::vector<RunRow> read_runs_csv(std::istream& in) {
  std::vector<RunRow> out;
  for (const auto& c : read_table(in, kRunsHeader, 7)) {
    out.push_back(RunRow{c[0], c[1], parse_double(c[2], "beta_or_L"),
                         parse_unsigned(c[3], "T"), parse_unsigned(c[4], "replication"),
                         parse_unsigned(c[5], "seed"), parse_double(c[6], "cum_regret")});
  }
  return out;
}

std::vector<AggregateRow> read_aggregate_csv(std::istream& in) {
  std::vector<AggregateRow> out;
  for (const auto& c : read_table(in, kAggregateHeader, 6)) {
    out.push_back(AggregateRow{c[0], c[1], parse_unsigned(c[2], "T"),
                               parse_double(c[3], "mean_regret"), parse_double(c[4], "stderr"),
                               parse_unsigned(c[5], "n")});
  }
  return out;
}

void write_gaps_csv(std::ostream& out, const GapSweep& sweep) {
  out << kGapsHeader << '\n';
  const std::string regime = to_string(sweep.regime);
  for (const auto& r : sweep.rows) {
    out << regime << ',' << fmt(r.beta) << ',' << fmt(r.nu) << ',' << fmt(r.d) << ','
        << fmt(r.alpha_lower) << ',' << fmt(r.alpha_upper) << ',' << fmt(r.gap) << '\n';
  }
}

void write_gap_summary_csv(std::ostream& out, const GapSweep& sweep) {
  out << "max_gap,argmax_ratio\n" << fmt(sweep.max_gap) << ',' << fmt(sweep.argmax_ratio()) << '\n';
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

}  // namespace tvkb
