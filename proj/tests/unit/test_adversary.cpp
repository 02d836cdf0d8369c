#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "tvkb/adversary.hpp"
#include "tvkb/error.hpp"

using namespace tvkb;
using oracle::pt;

namespace {

std::vector<std::size_t> lengths(const Schedule& s) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j + 1 < s.block_bounds.size(); ++j) {
    out.push_back(s.block_bounds[j + 1] - s.block_bounds[j]);
  }
  return out;
}

void expect_prefix_shape(const EnvironmentInstance& inst) {
  const auto& a = inst.audit();
  const auto& b = inst.schedule().block_bounds;
  ASSERT_EQ(a.prefix.size(), inst.horizon());
  EXPECT_EQ(a.prefix.back(), a.realized);
  for (std::size_t t = 2; t <= inst.horizon(); ++t) {
    ASSERT_GE(a.prefix[t - 1], a.prefix[t - 2]);
    // The prefix only moves at a block's last step.
    if (a.prefix[t - 1] != a.prefix[t - 2]) {
      ASSERT_TRUE(std::binary_search(b.begin() + 1, b.end() - 1, t)) << "t=" << t;
    }
  }
}

}  // namespace

TEST(Blocks, RemainderGoesToLastBlock) {
  EXPECT_EQ(block_bounds(100, 4), (std::vector<std::size_t>{0, 25, 50, 75, 100}));
  EXPECT_EQ(block_bounds(10, 3), (std::vector<std::size_t>{0, 3, 6, 10}));
  EXPECT_EQ(block_bounds(7, 1), (std::vector<std::size_t>{0, 7}));
}

TEST(Switches, StationaryWhenSingleBlock) {
  SplitMix64 rng(1);
  const auto cls = hard_class(KernelSpec::matern(1.5), 1, 1.0, 0.05);
  const auto inst = schedule_switches(50, 1, cls, rng);
  EXPECT_EQ(inst.schedule().blocks(), 1u);
  EXPECT_EQ(inst.audit().realized, 0.0);
  EXPECT_TRUE(inst.flags().stationary_regime);
  for (double p : inst.audit().prefix) EXPECT_EQ(p, 0.0);
}

TEST(Switches, BlockLengthExamples) {
  SplitMix64 rng(2);
  const auto cls = hard_class(KernelSpec::matern(1.5), 1, 1.0, 0.05);
  EXPECT_EQ(lengths(schedule_switches(100, 4, cls, rng).schedule()),
            (std::vector<std::size_t>{25, 25, 25, 25}));
  EXPECT_EQ(lengths(schedule_switches(10, 3, cls, rng).schedule()),
            (std::vector<std::size_t>{3, 3, 4}));
  EXPECT_THROW(schedule_switches(10, 0, cls, rng), ValidationError);
  EXPECT_THROW(schedule_switches(10, 11, cls, rng), ValidationError);
}

TEST(Switches, CountNeverExceedsBudget) {
  const auto cls = hard_class(KernelSpec::matern(0.5), 1, 1.0, 0.1);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SplitMix64 rng(seed);
    const auto inst = schedule_switches(200, 5, cls, rng);
    EXPECT_LE(inst.audit().realized, 4.0);
    EXPECT_TRUE(inst.audit().passed);
    double count = 0;
    const auto& m = inst.schedule().member_idx;
    for (std::size_t j = 0; j + 1 < m.size(); ++j) count += m[j] != m[j + 1];
    EXPECT_EQ(inst.audit().realized, count);
    expect_prefix_shape(inst);
  }
}

TEST(Linf, FormulaExample) {
  SplitMix64 rng(3);
  const auto inst = schedule_linf(10000, 1.0, KernelSpec::matern(1.0), 1.0, 1, {}, rng);
  EXPECT_EQ(inst.schedule().blocks(), 10u);
  EXPECT_NEAR(inst.hard_class().eps(), 0.025, 1e-15);
  EXPECT_FALSE(inst.flags().stationary_regime);
  EXPECT_LE(inst.audit().realized, 1.0);
}

TEST(Linf, LargeBudgetChangesEveryStep) {
  SplitMix64 rng(4);
  const std::size_t T = 200;
  const double delta = std::max(4 * 0.1 * T, static_cast<double>(T));
  const auto inst = schedule_linf(T, delta, KernelSpec::matern(1.0), 1.0, 1, {}, rng);
  EXPECT_EQ(inst.schedule().blocks(), T);
  EXPECT_TRUE(inst.audit().passed);
}

TEST(Linf, TinyBudgetIsStationary) {
  SplitMix64 rng(5);
  const auto inst = schedule_linf(100, 1e-4, KernelSpec::matern(1.5), 1.0, 1, {}, rng);
  EXPECT_EQ(inst.schedule().blocks(), 1u);
  EXPECT_TRUE(inst.flags().stationary_regime);
  EXPECT_EQ(inst.audit().realized, 0.0);
}

TEST(Linf, RandomInstancesRespectBudget) {
  oracle::Gen g(6);
  for (int c = 0; c < 30; ++c) {
    const std::size_t T = g.between(10, 3000);
    const double delta = g.log_uniform(1e-2, 50.0);
    const double nu = g.uniform(0.5, 3.0);
    const std::size_t d = 1 + g.index(2);
    SplitMix64 rng(g.bits());
    const auto inst = schedule_linf(T, delta, KernelSpec::matern(nu), 1.0, d, {}, rng);
    EXPECT_LE(inst.audit().realized, delta);
    for (const auto& ch : inst.audit().changes) EXPECT_LE(ch.cost, 4 * inst.hard_class().eps());
    expect_prefix_shape(inst);
  }
}

TEST(Linf, BlockCountMonotoneInBudget) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::size_t prev = 0;
    for (double delta : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 40.0}) {
      SplitMix64 rng(seed);
      const auto inst = schedule_linf(2000, delta, KernelSpec::matern(1.5), 1.0, 1, {}, rng);
      EXPECT_GE(inst.schedule().blocks(), prev);
      prev = inst.schedule().blocks();
    }
  }
}

TEST(Rkhs, SmallBranchBlockCount) {
  SplitMix64 rng(7);
  const auto inst = schedule_rkhs(400, 8.0, KernelSpec::matern(0.5, 0.2), 1.0, 1, {}, rng);
  EXPECT_EQ(inst.flags().branch, "nu<=d");
  EXPECT_EQ(inst.schedule().blocks(), 4u);
  EXPECT_TRUE(inst.audit().passed);
}

TEST(Rkhs, LargeBranchBlockCountAndPerBlockNorm) {
  SplitMix64 rng(8);
  const auto inst = schedule_rkhs(1000, 1.0, KernelSpec::matern(1.5, 0.2), 1.0, 1, {}, rng);
  EXPECT_EQ(inst.flags().branch, "nu>d");
  ASSERT_EQ(inst.schedule().blocks(), 10u);
  ASSERT_EQ(inst.schedule().per_block_norm.size(), 10u);
  for (double b : inst.schedule().per_block_norm) EXPECT_DOUBLE_EQ(b, 1.0 / 20.0);
  EXPECT_LE(inst.flags().max_member_certificate, 1.0 / 20.0);
  for (const auto& ch : inst.audit().changes) EXPECT_LE(ch.cost, 2.0 / 20.0);
  EXPECT_TRUE(inst.audit().certificate_semantics);
  EXPECT_LE(inst.audit().realized, 1.0);
}

TEST(Rkhs, BothBranchValuesRecorded) {
  SplitMix64 rng(9);
  const auto inst = schedule_rkhs(500, 4.0, KernelSpec::matern(1.5, 0.3), 1.0, 1, {}, rng);
  // Half-integer nu never equals an integer d; check both sides instead.
  EXPECT_EQ(inst.flags().blocks_small_branch, 2.0);
  EXPECT_EQ(inst.flags().blocks_large_branch, std::round(std::cbrt(500.0 * 16.0)));
  SplitMix64 rng2(9);
  const auto two_d = schedule_rkhs(500, 4.0, KernelSpec::matern(1.5, 0.3), 1.0, 2, {}, rng2);
  EXPECT_EQ(two_d.flags().branch, "nu<=d");
  EXPECT_EQ(two_d.schedule().blocks(), 2u);
}

TEST(Rkhs, TinyBudgetFallsBackToStationary) {
  SplitMix64 rng(10);
  const auto inst = schedule_rkhs(100, 0.01, KernelSpec::matern(2.5, 0.3), 1.0, 1, {}, rng);
  EXPECT_TRUE(inst.flags().stationary_regime);
  EXPECT_EQ(inst.schedule().blocks(), 1u);
  EXPECT_EQ(inst.schedule().per_block_norm.front(), 1.0);
  EXPECT_THROW(schedule_rkhs(100, 1.0, KernelSpec::matern(2.0), 1.0, 1, {}, rng), ValidationError);
}

TEST(Rkhs, RandomInstancesRespectBudget) {
  oracle::Gen g(11);
  const double nus[] = {0.5, 1.5, 2.5, 3.5};
  for (int c = 0; c < 25; ++c) {
    const std::size_t d = 1 + g.index(2);
    const double nu = d == 2 ? nus[1 + g.index(3)] : nus[g.index(4)];
    const KernelSpec k = KernelSpec::matern(nu, g.uniform(0.1, 1.0));
    const std::size_t T = g.between(20, 2000);
    const double delta = g.log_uniform(0.05, 20.0);
    SplitMix64 rng(g.bits());
    const auto inst = schedule_rkhs(T, delta, k, 1.0, d, {}, rng);
    EXPECT_LE(inst.audit().realized, delta);
    const double block_norm = inst.schedule().per_block_norm.front();
    for (const auto& ch : inst.audit().changes) EXPECT_LE(ch.cost, 2 * block_norm * (1 + 1e-9));
    expect_prefix_shape(inst);
  }
}

TEST(Audit, SingleChangeBetweenDisjointBumps) {
  const auto cls = hard_class(KernelSpec::matern(1.5), 1, 1.0, 0.05);
  Schedule s{10, {0, 5, 10}, {0, 1}, {}};
  const VariationBudget budget{BudgetKind::linf, 1.0};
  const EnvironmentInstance inst(cls, s, budget, {}, {});
  const auto report = audit_variation(inst, BudgetKind::linf, default_probe(cls, BudgetKind::linf));
  EXPECT_EQ(report.realized, 2 * cls.eps());
  EXPECT_LE(report.realized, 4 * cls.eps());
  ASSERT_EQ(report.changes.size(), 1u);
  EXPECT_EQ(report.changes[0].step, 5u);
  EXPECT_EQ(report.prefix[3], 0.0);
  EXPECT_EQ(report.prefix[4], 2 * cls.eps());
}

TEST(Audit, RepeatedMemberCostsNothing) {
  const auto cls = hard_class(KernelSpec::matern(1.5), 1, 1.0, 0.05);
  Schedule s{9, {0, 3, 6, 9}, {2, 2, 1}, {}};
  const EnvironmentInstance inst(cls, s, {BudgetKind::switches, 3}, {}, {});
  const auto sw = audit_variation(inst, BudgetKind::switches, {});
  EXPECT_EQ(sw.realized, 1.0);
  EXPECT_EQ(sw.changes[0].cost, 0.0);
}

TEST(Optimum, ActiveCenterAndPeak) {
  SplitMix64 rng(12);
  const auto cls = hard_class(KernelSpec::matern(1.5), 2, 1.0, 0.05);
  const auto inst = schedule_switches(60, 6, cls, rng);
  for (std::size_t t = 1; t <= 60; ++t) {
    const auto [x, v] = oracle_optimum(inst, t);
    const std::size_t block = (t - 1) / 10;
    EXPECT_EQ(x, cls.centers()[inst.schedule().member_idx[block]]);
    EXPECT_EQ(v, bump_eval(cls.member(inst.schedule().member_idx[block]), x));
    EXPECT_EQ(v, inst.value(t, x));
  }
  EXPECT_THROW(oracle_optimum(inst, 0), ValidationError);
  EXPECT_THROW(oracle_optimum(inst, 61), ValidationError);

  SplitMix64 rng2(13);
  const auto stationary = schedule_switches(30, 1, cls, rng2);
  for (std::size_t t = 2; t <= 30; ++t) {
    EXPECT_EQ(oracle_optimum(stationary, t).first, oracle_optimum(stationary, 1).first);
  }
}

TEST(Reproducibility, SameSeedSameSchedule) {
  for (auto kind : {BudgetKind::switches, BudgetKind::linf, BudgetKind::rkhs}) {
    auto build = [&](std::uint64_t seed) {
      SplitMix64 rng(seed);
      const auto k = KernelSpec::matern(1.5, 0.3);
      if (kind == BudgetKind::switches) {
        return schedule_switches(300, 7, hard_class(k, 1, 1.0, 0.05), rng);
      }
      if (kind == BudgetKind::linf) return schedule_linf(300, 2.0, k, 1.0, 1, {}, rng);
      return schedule_rkhs(300, 2.0, k, 1.0, 1, {}, rng);
    };
    EXPECT_EQ(build(77).to_json(true).dump(), build(77).to_json(true).dump());
    EXPECT_EQ(build(77).schedule().to_json().dump(), build(77).schedule().to_json().dump());
  }
}

TEST(Serialization, InstanceJsonSections) {
  SplitMix64 rng(14);
  const auto inst = schedule_linf(100, 1.0, KernelSpec::matern(1.5), 1.0, 1, {}, rng);
  const auto j = inst.to_json(true);
  for (const char* key : {"class", "schedule", "budget", "audit", "flags"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["audit"]["prefix"].size(), 100u);
  EXPECT_FALSE(inst.to_json(false)["audit"].contains("prefix"));
}

TEST(BudgetNames, RoundTrip) {
  for (auto k : {BudgetKind::switches, BudgetKind::linf, BudgetKind::rkhs}) {
    EXPECT_EQ(budget_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(budget_kind_from_string("l2"), ValidationError);
}
