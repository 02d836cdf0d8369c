#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "tvkb/error.hpp"
#include "tvkb/exponents.hpp"

using namespace tvkb;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lower(BudgetKind k, double nu, double d, double beta) {
  return lower_exponent({k, BoundSide::lower, nu, d, beta});
}
double upper(BudgetKind k, double nu, double d, double beta) {
  return upper_exponent({k, BoundSide::upper, nu, d, beta});
}

// Independent transcription of the bound table in terms of nu and d.
double table_lower(BudgetKind k, double nu, double d, double beta) {
  const double floor = (nu + d) / (2 * nu + d);
  switch (k) {
    case BudgetKind::switches:
      return beta * nu / (2 * nu + d) + floor;
    case BudgetKind::linf:
      return std::max(floor, beta * nu / (3 * nu + d) + (2 * nu + d) / (3 * nu + d));
    case BudgetKind::rkhs:
      return nu <= d ? std::max(floor, beta * nu / (2 * nu + d) + floor)
                     : std::max(floor, beta / 3 + 2.0 / 3);
  }
  return 0.0;
}
double table_upper(BudgetKind k, double nu, double d, double beta) {
  if (k == BudgetKind::switches) return std::min(1.0, beta / 2 + (nu + d) / (2 * nu + d));
  return std::min(1.0, beta / 3 + (4 * nu / 3 + d) / (2 * nu + d));
}

const BudgetKind kRegimes[] = {BudgetKind::switches, BudgetKind::linf, BudgetKind::rkhs};

}  // namespace

TEST(LowerExponent, SpotValues) {
  EXPECT_NEAR(lower(BudgetKind::linf, 1, 1, 0), 0.75, 1e-12);
  EXPECT_NEAR(lower(BudgetKind::linf, 2.5, 2.5, 0), 0.75, 1e-12);
  EXPECT_NEAR(lower(BudgetKind::rkhs, 2.5, 1, 0.9), 0.9 / 3 + 2.0 / 3, 1e-12);
  EXPECT_NEAR(lower(BudgetKind::rkhs, 2.5, 1, 0.9), 0.96667, 1e-5);
}

TEST(LowerExponent, LinearBudgetForcesLinearRegret) {
  for (auto k : kRegimes) {
    for (double nu : {0.5, 1.5, 4.0, kInf}) {
      for (double d : {1.0, 3.0}) EXPECT_NEAR(lower(k, nu, d, 1.0), 1.0, 1e-12);
    }
  }
}

TEST(LowerExponent, SmoothLimit) {
  for (double beta : {0.0, 0.25, 0.5, 0.9}) {
    EXPECT_NEAR(lower(BudgetKind::linf, kInf, 1, beta), beta / 3 + 2.0 / 3, 1e-12);
    // Approaches the limit from above.
    EXPECT_GE(lower(BudgetKind::linf, 1e6, 1, beta), beta / 3 + 2.0 / 3 - 1e-12);
    EXPECT_NEAR(lower(BudgetKind::linf, 1e9, 1, beta), beta / 3 + 2.0 / 3, 1e-8);
  }
}

TEST(LowerExponent, MatchesTableOnGrid) {
  oracle::Gen g(41);
  for (int i = 0; i < 2000; ++i) {
    const double nu = g.log_uniform(0.05, 20.0);
    const double d = static_cast<double>(1 + g.index(8));
    const double beta = g.uniform();
    for (auto k : kRegimes) {
      EXPECT_NEAR(lower(k, nu, d, beta), table_lower(k, nu, d, beta), 1e-12);
      EXPECT_NEAR(upper(k, nu, d, beta), table_upper(k, nu, d, beta), 1e-12);
    }
  }
}

TEST(UpperExponent, SpotValues) {
  EXPECT_NEAR(upper(BudgetKind::linf, 1, 1, 0), 7.0 / 9, 1e-12);
  EXPECT_NEAR(upper(BudgetKind::linf, 1, 1, 0), 0.77778, 1e-5);
  EXPECT_NEAR(upper(BudgetKind::rkhs, 1, 1, 0), 7.0 / 9, 1e-12);
  EXPECT_NEAR(upper(BudgetKind::linf, 0.5, 1, 0.5), 1.0, 1e-12);
  EXPECT_NEAR(upper(BudgetKind::linf, kInf, 1, 0), 2.0 / 3, 1e-12);
  EXPECT_NEAR(upper(BudgetKind::switches, 1, 1, 0), 2.0 / 3, 1e-12);
}

TEST(Exponents, RejectsBadQueries) {
  EXPECT_THROW(lower(BudgetKind::linf, 0, 1, 0), ValidationError);
  EXPECT_THROW(lower(BudgetKind::linf, 1, 0, 0), ValidationError);
  EXPECT_THROW(upper(BudgetKind::linf, 1, 1, 1.5), ValidationError);
  EXPECT_THROW(upper(BudgetKind::linf, 1, 1, -0.1), ValidationError);
  EXPECT_THROW(se_exponents(BudgetKind::linf, 2.0), ValidationError);
}

TEST(ExponentProperties, LowerNeverExceedsUpperOnFullSweep) {
  for (int i = 0; i < 50; ++i) {
    const double nu = 0.1 * (i + 1);
    for (int j = 0; j < 50; ++j) {
      const double d = 0.2 * (j + 1);
      for (int b = 0; b <= 10; ++b) {
        const double beta = 0.1 * b;
        for (auto k : kRegimes) {
          const double lo = lower(k, nu, d, beta);
          const double hi = upper(k, nu, d, beta);
          ASSERT_LE(lo, hi + 1e-12) << nu << ' ' << d << ' ' << beta;
          ASSERT_GE(lo, 0.0);
          ASSERT_LE(hi, 1.0);
        }
      }
    }
  }
}

TEST(ExponentProperties, DependOnlyOnRatio) {
  oracle::Gen g(42);
  for (int i = 0; i < 500; ++i) {
    const double nu = g.log_uniform(0.1, 10);
    const double d = g.log_uniform(0.5, 8);
    const double s = g.log_uniform(0.1, 10);
    const double beta = g.uniform();
    for (auto k : kRegimes) {
      EXPECT_NEAR(lower(k, nu, d, beta), lower(k, s * nu, s * d, beta), 1e-12);
      EXPECT_NEAR(upper(k, nu, d, beta), upper(k, s * nu, s * d, beta), 1e-12);
    }
  }
}

TEST(ExponentProperties, MonotoneInBeta) {
  oracle::Gen g(43);
  for (int i = 0; i < 500; ++i) {
    const double nu = g.log_uniform(0.1, 10);
    const double d = 1.0 + static_cast<double>(g.index(5));
    const double b1 = g.uniform();
    const double b2 = g.uniform(b1, 1.0);
    for (auto k : kRegimes) {
      EXPECT_LE(lower(k, nu, d, b1), lower(k, nu, d, b2) + 1e-12);
      EXPECT_LE(upper(k, nu, d, b1), upper(k, nu, d, b2) + 1e-12);
    }
  }
}

TEST(ExponentProperties, RkhsBranchesAgreeAtEqualSmoothnessAndDimension) {
  for (double d : {1.0, 2.0, 5.0}) {
    for (double beta : {0.0, 0.3, 0.7, 1.0}) {
      const double nu_le_branch = beta * d / (2 * d + d) + (d + d) / (2 * d + d);
      const double nu_ge_branch = beta / 3 + 2.0 / 3;
      EXPECT_NEAR(nu_le_branch, nu_ge_branch, 1e-12);
      EXPECT_NEAR(lower(BudgetKind::rkhs, d, d, beta), nu_ge_branch, 1e-12);
      // Continuity across the branch point.
      EXPECT_NEAR(lower(BudgetKind::rkhs, d * (1 - 1e-9), d, beta),
                  lower(BudgetKind::rkhs, d * (1 + 1e-9), d, beta), 1e-8);
    }
  }
}

TEST(ExponentProperties, SwitchesGapVanishesAtConstantSwitchCount) {
  for (double r : default_ratio_grid()) {
    EXPECT_NEAR(upper(BudgetKind::switches, r, 1, 0) - lower(BudgetKind::switches, r, 1, 0), 0.0,
                1e-12);
  }
}

TEST(RatioGrid, Shape) {
  const auto grid = default_ratio_grid();
  ASSERT_EQ(grid.size(), 97u);
  EXPECT_NEAR(grid.front(), 1.0 / 8, 1e-15);
  EXPECT_NEAR(grid.back(), 8.0, 1e-12);
  EXPECT_EQ(grid[48], 1.0);
  for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_GT(grid[i], grid[i - 1]);
  EXPECT_THROW(default_ratio_grid(1), ValidationError);
}

TEST(GapSweep, LinfAtConstantBudget) {
  const auto s = ratio_gap_sweep(BudgetKind::linf, 0.0);
  // Dense-search oracle for the maximum of the difference over r in [1/8, 8].
  double best = 0.0, arg = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double r = std::pow(8.0, -1.0 + 2.0 * i / 200000.0);
    const double gap = (4 * r / 3 + 1) / (2 * r + 1) - (2 * r + 1) / (3 * r + 1);
    if (gap > best) best = gap, arg = r;
  }
  EXPECT_NEAR(best, 0.0337, 5e-4);
  EXPECT_NEAR(arg, 0.4, 0.05);
  EXPECT_LE(s.max_gap, best + 1e-12);
  EXPECT_NEAR(s.max_gap, best, 1e-4);
  EXPECT_NEAR(s.argmax_ratio(), arg, 0.05);
  EXPECT_LE(s.max_gap, 0.035);
  for (const auto& row : s.rows) EXPECT_GE(row.gap, -1e-12);
}

TEST(GapSweep, RkhsAtConstantBudget) {
  const auto s = ratio_gap_sweep(BudgetKind::rkhs, 0.0);
  EXPECT_NEAR(s.max_gap, 1.0 / 9, 1e-12);
  EXPECT_EQ(s.argmax_ratio(), 1.0);
}

TEST(GapSweep, CaptionBounds) {
  EXPECT_LE(ratio_gap_sweep(BudgetKind::linf, 0.1).max_gap, 0.055);
  EXPECT_LE(ratio_gap_sweep(BudgetKind::linf, 0.5).max_gap, 0.105);
  EXPECT_LE(ratio_gap_sweep(BudgetKind::linf, 0.9).max_gap, 0.034);
}

TEST(GapSweep, RowsCoverGridProduct) {
  const double nus[] = {0.5, 1.5, 2.5};
  const double ds[] = {1, 2};
  const auto s = gap_sweep(BudgetKind::linf, 0.2, nus, ds);
  ASSERT_EQ(s.rows.size(), 6u);
  for (const auto& row : s.rows) {
    EXPECT_EQ(row.beta, 0.2);
    EXPECT_NEAR(row.gap, row.alpha_upper - row.alpha_lower, 1e-15);
    EXPECT_LE(row.gap, s.max_gap);
  }
  EXPECT_THROW(gap_sweep(BudgetKind::linf, 0.2, std::span<const double>{}, ds), ValidationError);
}

TEST(CrossNorm, Examples) {
  const double one[] = {1.0};
  const auto at_half = crossnorm_gap(0.5, one, one);
  ASSERT_EQ(at_half.size(), 1u);
  EXPECT_NEAR(at_half[0].alpha_linf, 0.875, 1e-12);
  EXPECT_NEAR(at_half[0].alpha_rkhs, 5.0 / 6, 1e-12);
  EXPECT_NEAR(at_half[0].difference, 0.04167, 1e-5);

  const auto grid = default_ratio_grid(33);
  for (const auto& row : crossnorm_gap(1.0, grid, one)) EXPECT_NEAR(row.difference, 0.0, 1e-12);
  for (const auto& row : crossnorm_gap(0.0, grid, one)) {
    EXPECT_NEAR(row.difference,
                table_lower(BudgetKind::linf, row.nu, 1, 0) -
                    table_lower(BudgetKind::rkhs, row.nu, 1, 0),
                1e-12);
    EXPECT_GE(row.difference, -1e-12);
  }
}

TEST(SquaredExponential, Exponents) {
  EXPECT_EQ(se_exponents(BudgetKind::switches, 0.0), std::make_pair(0.5, 0.5));
  const auto linf = se_exponents(BudgetKind::linf, 0.0);
  EXPECT_NEAR(linf.first, 2.0 / 3, 1e-15);
  EXPECT_NEAR(linf.second, 2.0 / 3, 1e-15);
  for (auto k : kRegimes) {
    const auto full = se_exponents(k, 1.0);
    EXPECT_NEAR(full.first, 1.0, 1e-15);
    EXPECT_NEAR(full.second, 1.0, 1e-15);
  }
  // Agrees with the Matern lower bound in the smooth limit for the norm budgets.
  EXPECT_NEAR(se_exponents(BudgetKind::linf, 0.4).first, lower(BudgetKind::linf, kInf, 1, 0.4),
              1e-12);
}
