#include "tvkb/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tvkb/error.hpp"

namespace tvkb {

namespace {

// (a r + b) / (c r + e) with r = nu/d, taking the r -> inf limit a/c.
double ratio_form(double a, double b, double c, double e, double r) {
  if (std::isinf(r)) return a / c;
  return (a * r + b) / (c * r + e);
}

double checked_ratio(const ExponentQuery& q) {
  if (!(q.nu > 0.0)) throw ValidationError("exponent query: nu must be positive");
  if (!(q.d > 0.0) || std::isinf(q.d)) throw ValidationError("exponent query: d must be positive");
  if (!(q.beta >= 0.0) || q.beta > 1.0) {
    throw ValidationError("exponent query: beta must lie in [0, 1]");
  }
  return q.nu / q.d;
}

double stationary_floor(double r) { return ratio_form(1, 1, 2, 1, r); }  // (nu+d)/(2nu+d)

}  // namespace

double lower_exponent(const ExponentQuery& q) {
  const double r = checked_ratio(q);
  const double floor = stationary_floor(r);
  switch (q.regime) {
    case BudgetKind::switches:
      // L^(nu/(2nu+d)) T^((nu+d)/(2nu+d))
      return q.beta * ratio_form(1, 0, 2, 1, r) + floor;
    case BudgetKind::linf:
      // Delta^(nu/(3nu+d)) T^((2nu+d)/(3nu+d))
      return std::max(floor, q.beta * ratio_form(1, 0, 3, 1, r) + ratio_form(2, 1, 3, 1, r));
    case BudgetKind::rkhs:
      if (r <= 1.0) return std::max(floor, q.beta * ratio_form(1, 0, 2, 1, r) + floor);
      return std::max(floor, q.beta / 3.0 + 2.0 / 3.0);
  }
  return floor;
}

double upper_exponent(const ExponentQuery& q) {
  const double r = checked_ratio(q);
  if (q.regime == BudgetKind::switches) {
    // sqrt(L) T^((nu+d)/(2nu+d))
    return std::min(1.0, q.beta / 2.0 + stationary_floor(r));
  }
  // Delta^(1/3) T^((4nu/3+d)/(2nu+d)) for both norms.
  return std::min(1.0, q.beta / 3.0 + ratio_form(4.0 / 3.0, 1, 2, 1, r));
}

GapSweep gap_sweep(BudgetKind regime, double beta, std::span<const double> nu_grid,
                   std::span<const double> d_grid) {
  if (nu_grid.empty() || d_grid.empty()) throw ValidationError("gap_sweep: empty grid");
  GapSweep out;
  out.regime = regime;
  out.beta = beta;
  out.max_gap = -1.0;
  std::map<double, std::pair<double, double>> by_ratio;
  for (double nu : nu_grid) {
    for (double d : d_grid) {
      ExponentQuery q{regime, BoundSide::lower, nu, d, beta};
      GapRow row{nu, d, beta, lower_exponent(q), 0.0, 0.0};
      q.side = BoundSide::upper;
      row.alpha_upper = upper_exponent(q);
      row.gap = row.alpha_upper - row.alpha_lower;

      const auto [it, inserted] = by_ratio.emplace(nu / d, std::pair{row.alpha_lower, row.alpha_upper});
      if (!inserted && (std::abs(it->second.first - row.alpha_lower) > 1e-12 ||
                        std::abs(it->second.second - row.alpha_upper) > 1e-12)) {
        throw NumericError("gap_sweep: exponents differ between cells with equal nu/d");
      }
      if (row.gap > out.max_gap) {
        out.max_gap = row.gap;
        out.argmax_nu = nu;
        out.argmax_d = d;
      }
      out.rows.push_back(row);
    }
  }
  return out;
}

std::vector<double> default_ratio_grid(std::size_t points) {
  if (points < 2) throw ValidationError("ratio grid needs at least two points");
  std::vector<double> grid;
  grid.reserve(points);
  const double half = static_cast<double>(points - 1) / 2.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double e = (static_cast<double>(i) - half) / half;  // [-1, 1]
    grid.push_back(e == 0.0 ? 1.0 : std::pow(8.0, e));
  }
  return grid;
}

GapSweep ratio_gap_sweep(BudgetKind regime, double beta, std::size_t points) {
  const auto ratios = default_ratio_grid(points);
  const double d[] = {1.0};
  return gap_sweep(regime, beta, ratios, d);
}

std::vector<CrossNormRow> crossnorm_gap(double beta, std::span<const double> nu_grid,
                                        std::span<const double> d_grid) {
  if (nu_grid.empty() || d_grid.empty()) throw ValidationError("crossnorm_gap: empty grid");
  std::vector<CrossNormRow> rows;
  rows.reserve(nu_grid.size() * d_grid.size());
  for (double nu : nu_grid) {
    for (double d : d_grid) {
      CrossNormRow row{nu, d, beta, 0.0, 0.0, 0.0};
      row.alpha_linf = lower_exponent({BudgetKind::linf, BoundSide::lower, nu, d, beta});
      row.alpha_rkhs = lower_exponent({BudgetKind::rkhs, BoundSide::lower, nu, d, beta});
      row.difference = row.alpha_linf - row.alpha_rkhs;
      rows.push_back(row);
    }
  }
  return rows;
}

std::pair<double, double> se_exponents(BudgetKind regime, double beta) {
  if (!(beta >= 0.0) || beta > 1.0) throw ValidationError("se_exponents: beta must lie in [0, 1]");
  const double alpha = regime == BudgetKind::switches ? beta / 2.0 + 0.5 : beta / 3.0 + 2.0 / 3.0;
  const double capped = std::min(1.0, alpha);
  return {capped, capped};
}

}  // namespace tvkb
