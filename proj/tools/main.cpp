#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "exit_codes.hpp"
#include "selftest.hpp"
#include "tvkb/error.hpp"
#include "tvkb/exponents.hpp"
#include "tvkb/gp.hpp"
#include "tvkb/harness.hpp"

namespace {

using namespace tvkb;

using cli::kNumeric;
using cli::kOk;
using cli::kValidation;

double parse_nu(const std::string& text) {
  if (text == "inf" || text == "se") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double nu = std::stod(text, &used);
  if (used != text.size()) throw ValidationError("--nu: bad number '" + text + "'");
  return nu;
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      out.push_back(parse_nu(cell));
    } catch (const std::exception&) {
      throw ValidationError(std::string(flag) + ": bad number '" + cell + "'");
    }
  }
  if (out.empty()) throw ValidationError(std::string(flag) + ": empty list");
  return out;
}

std::string sibling(const std::string& path, const std::string& name) {
  const auto parent = std::filesystem::path(path).parent_path();
  return (parent / name).string();
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  const auto stem = p.stem().string();
  return (p.parent_path() / (stem + suffix)).string();
}

void print_fits(const MonteCarloResult& mc, const ExperimentConfig& config) {
  if (config.horizons.size() < 3) return;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::vector<std::string> order;
  for (const auto& row : mc.aggregate) {
    if (!series.count(row.policy)) order.push_back(row.policy);
    series[row.policy].emplace_back(static_cast<double>(row.horizon), row.mean_regret);
  }
  for (const auto& id : order) {
    const auto& pts = series[id];
    bool positive = true;
    for (const auto& p : pts) positive = positive && p.second > 0.0;
    if (!positive) {
      std::printf("%-36s alpha_hat=n/a (zero regret)\n", id.c_str());
      continue;
    }
    const auto fit = fit_exponent(pts);
    std::printf("%-36s alpha_hat=%.4f stderr=%.4f r2=%.4f\n", id.c_str(), fit.alpha,
                fit.stderr_alpha, fit.r_squared);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-varying kernelized bandit laboratory"};
  app.require_subcommand(1);

  // exponents
  auto* exp_cmd = app.add_subcommand("exponents", "Print lower and upper regret exponents");
  std::string exp_regime = "linf";
  std::string exp_nu = "1.5";
  double exp_d = 1.0;
  double exp_beta = 0.0;
  exp_cmd->add_option("--regime", exp_regime, "switches | linf | rkhs")->required();
  exp_cmd->add_option("--nu", exp_nu, "Matern smoothness, or 'inf' for SE")->required();
  exp_cmd->add_option("--d", exp_d, "Dimension")->required();
  exp_cmd->add_option("--beta", exp_beta, "Budget growth exponent in [0, 1]")->required();

  // gaps
  auto* gap_cmd = app.add_subcommand("gaps", "Sweep the lower/upper exponent gap");
  std::string gap_regime = "linf";
  double gap_beta = 0.0;
  std::string gap_out;
  std::string gap_nu_grid;
  std::string gap_d_grid;
  std::size_t gap_points = 97;
  gap_cmd->add_option("--regime", gap_regime, "switches | linf | rkhs")->required();
  gap_cmd->add_option("--beta", gap_beta, "Budget growth exponent")->required();
  gap_cmd->add_option("--out", gap_out, "Output CSV")->required();
  gap_cmd->add_option("--nu-grid", gap_nu_grid, "Comma-separated nu values");
  gap_cmd->add_option("--d-grid", gap_d_grid, "Comma-separated d values");
  gap_cmd->add_option("--points", gap_points, "Ratio grid size when no grids are given");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte-Carlo experiment");
  std::string sim_config;
  std::string sim_out;
  std::string sim_aggregate;
  std::size_t sim_workers = 0;
  sim_cmd->add_option("--config", sim_config, "Experiment JSON")->required();
  sim_cmd->add_option("--out", sim_out, "Per-run CSV")->required();
  sim_cmd->add_option("--aggregate", sim_aggregate, "Aggregate CSV (default: aggregate.csv next to --out)");
  sim_cmd->add_option("--workers", sim_workers, "Worker threads (0 = all cores)");

  // audit
  auto* audit_cmd = app.add_subcommand("audit", "Build and audit the configured instances");
  std::string audit_config;
  std::string audit_out;
  std::size_t audit_rep = 0;
  bool audit_prefix = false;
  audit_cmd->add_option("--config", audit_config, "Experiment JSON")->required();
  audit_cmd->add_option("--replication", audit_rep, "Replication index to build");
  audit_cmd->add_option("--out", audit_out, "Write the instance JSON here instead of stdout");
  audit_cmd->add_flag("--prefix", audit_prefix, "Include the running variation prefix");

  // selftest
  auto* self_cmd = app.add_subcommand("selftest", "Run the oracle-equivalence suite");
  unsigned self_cases = 50;
  self_cmd->add_option("--cases", self_cases, "Random cases per check");

  // info-gain
  auto* ig_cmd = app.add_subcommand("info-gain", "Greedy information-gain estimate");
  double ig_nu = 1.5;
  std::size_t ig_d = 1;
  std::size_t ig_t = 64;
  double ig_sigma = 0.1;
  double ig_ell = 1.0;
  std::size_t ig_grid = 0;
  ig_cmd->add_option("--nu", ig_nu, "Matern smoothness")->required();
  ig_cmd->add_option("--d", ig_d, "Dimension")->required();
  ig_cmd->add_option("--T", ig_t, "Number of greedy picks")->required();
  ig_cmd->add_option("--sigma", ig_sigma, "Noise standard deviation")->required();
  ig_cmd->add_option("--lengthscale", ig_ell, "Kernel lengthscale");
  ig_cmd->add_option("--grid", ig_grid, "Candidate points per axis (default: about 128 total)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*exp_cmd) {
      const ExponentQuery q{budget_kind_from_string(exp_regime), BoundSide::lower,
                            parse_nu(exp_nu), exp_d, exp_beta};
      ExponentQuery up = q;
      up.side = BoundSide::upper;
      std::printf("alpha_lower=%.12g\nalpha_upper=%.12g\n", lower_exponent(q), upper_exponent(up));
    } else if (*gap_cmd) {
      const auto regime = budget_kind_from_string(gap_regime);
      GapSweep sweep;
      if (gap_nu_grid.empty() && gap_d_grid.empty()) {
        sweep = ratio_gap_sweep(regime, gap_beta, gap_points);
      } else {
        const auto nus = parse_list(gap_nu_grid.empty() ? "1" : gap_nu_grid, "--nu-grid");
        const auto ds = parse_list(gap_d_grid.empty() ? "1" : gap_d_grid, "--d-grid");
        sweep = gap_sweep(regime, gap_beta, nus, ds);
      }
      std::ostringstream rows;
      write_gaps_csv(rows, sweep);
      write_text_file(gap_out, rows.str());
      std::ostringstream summary;
      write_gap_summary_csv(summary, sweep);
      write_text_file(with_suffix(gap_out, ".summary.csv"), summary.str());
      std::cout << summary.str();
    } else if (*sim_cmd) {
      const auto config = load_config(sim_config);
      const auto mc = monte_carlo(config, sim_workers);
      std::ostringstream runs;
      write_runs_csv(runs, mc.runs);
      write_text_file(sim_out, runs.str());
      std::ostringstream agg;
      write_aggregate_csv(agg, mc.aggregate);
      write_text_file(sim_aggregate.empty() ? sibling(sim_out, "aggregate.csv") : sim_aggregate,
                      agg.str());
      print_fits(mc, config);
    } else if (*audit_cmd) {
      const auto config = load_config(audit_config);
      if (audit_rep >= config.replications) {
        throw ValidationError("--replication must be below the configured replications");
      }
      nlohmann::json out = nlohmann::json::array();
      for (std::size_t ti = 0; ti < config.horizons.size(); ++ti) {
        const auto inst = build_instance(config, config.horizons[ti],
                                         instance_seed(config.master_seed, ti, audit_rep));
        out.push_back(inst.to_json(audit_prefix));
      }
      const std::string text = out.dump(2) + "\n";
      if (audit_out.empty()) {
        std::cout << text;
      } else {
        write_text_file(audit_out, text);
      }
    } else if (*self_cmd) {
      if (!cli::run_selftest(std::cout, self_cases)) return kNumeric;
    } else if (*ig_cmd) {
      const auto kernel = KernelSpec::matern(ig_nu, ig_ell);
      const std::size_t per_axis =
          ig_grid > 0 ? ig_grid
                      : std::max<std::size_t>(
                            2, static_cast<std::size_t>(std::llround(
                                   std::pow(128.0, 1.0 / static_cast<double>(ig_d)))));
      const auto grid = uniform_grid(ig_d, per_axis);
      const auto g = greedy_info_gain(kernel, grid, ig_t, ig_sigma);
      std::printf("candidates=%zu\ngamma_hat=%.12g\n", grid.size(), g.gamma);
    }
  } catch (...) {
    return cli::exit_code_for(std::current_exception(), std::cerr);
  }
  return kOk;
}
