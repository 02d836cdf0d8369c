#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "tvkb/adversary.hpp"

namespace tvkb {

enum class BoundSide { lower, upper };

/// Regret exponent query: with Delta = Theta(T^beta) (or L = Theta(T^beta)
/// for switches), which alpha gives regret Theta(T^alpha)? nu may be +inf.
struct ExponentQuery {
  BudgetKind regime = BudgetKind::linf;
  BoundSide side = BoundSide::lower;
  double nu = 1.0;
  double d = 1.0;
  double beta = 0.0;
};

/// Algorithm-independent lower-bound exponent, including the stationary
/// floor (nu+d)/(2nu+d). Never exceeds 1 for beta <= 1.
double lower_exponent(const ExponentQuery& q);

/// Exponent of the best known upper bound, capped at 1 (trivial O(T)).
double upper_exponent(const ExponentQuery& q);

struct GapRow {
  double nu = 0.0;
  double d = 0.0;
  double beta = 0.0;
  double alpha_lower = 0.0;
  double alpha_upper = 0.0;
  double gap = 0.0;
};

struct GapSweep {
  BudgetKind regime = BudgetKind::linf;
  double beta = 0.0;
  std::vector<GapRow> rows;
  double max_gap = 0.0;
  double argmax_nu = 0.0;
  double argmax_d = 0.0;
  double argmax_ratio() const noexcept { return argmax_nu / argmax_d; }
};

/// Both exponents over nu_grid x d_grid. Throws if two cells with the same
/// nu/d ratio disagree (the exponents depend on nu, d only via nu/d).
GapSweep gap_sweep(BudgetKind regime, double beta, std::span<const double> nu_grid,
                   std::span<const double> d_grid);

/// r = nu/d on a log grid of `points` values in [1/8, 8]; the default 97
/// points include r = 1 exactly.
std::vector<double> default_ratio_grid(std::size_t points = 97);

/// gap_sweep over default_ratio_grid() with d = 1.
GapSweep ratio_gap_sweep(BudgetKind regime, double beta, std::size_t points = 97);

struct CrossNormRow {
  double nu = 0.0;
  double d = 0.0;
  double beta = 0.0;
  double alpha_linf = 0.0;
  double alpha_rkhs = 0.0;
  double difference = 0.0;  // alpha_linf - alpha_rkhs
};

std::vector<CrossNormRow> crossnorm_gap(double beta, std::span<const double> nu_grid,
                                        std::span<const double> d_grid);

/// Log-factor-suppressed SE exponents (lower, upper).
std::pair<double, double> se_exponents(BudgetKind regime, double beta);

}  // namespace tvkb
