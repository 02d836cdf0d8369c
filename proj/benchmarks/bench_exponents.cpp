#include <benchmark/benchmark.h>

#include "tvkb/exponents.hpp"

namespace {

void BM_RatioGapSweep(benchmark::State& state) {
  const auto points = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(tvkb::ratio_gap_sweep(tvkb::BudgetKind::linf, 0.5, points).max_gap);
  }
}
BENCHMARK(BM_RatioGapSweep)->Arg(97)->Arg(1025);

}  // namespace
