#include <benchmark/benchmark.h>

#include "tvkb/gp.hpp"
#include "tvkb/rng.hpp"

namespace {

void BM_GpStateUpdates(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = tvkb::KernelSpec::matern(1.5, 0.2);
  tvkb::SplitMix64 rng(3);
  std::vector<tvkb::Point> xs;
  for (std::size_t i = 0; i < n; ++i) xs.push_back(tvkb::Point::Constant(1, rng.unit()));
  for (auto _ : state) {
    tvkb::GPState s(k, 0.01);
    for (std::size_t i = 0; i < n; ++i) s.update(xs[i], rng.unit());
    benchmark::DoNotOptimize(s.posterior(xs[0]).mean);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GpStateUpdates)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_CandidatePosteriorObserve(benchmark::State& state) {
  const auto grid = tvkb::uniform_grid(1, static_cast<std::size_t>(state.range(0)));
  const auto k = tvkb::KernelSpec::matern(1.5, 0.2);
  tvkb::CandidatePosterior post(k, grid, 0.01);
  tvkb::SplitMix64 rng(4);
  for (auto _ : state) {
    post.observe(rng.below(grid.size()), rng.unit());
    benchmark::DoNotOptimize(post.mean(0));
  }
}
BENCHMARK(BM_CandidatePosteriorObserve)->Arg(16)->Arg(64)->Arg(256);

void BM_GreedyInfoGain(benchmark::State& state) {
  const auto grid = tvkb::uniform_grid(1, 128);
  const auto k = tvkb::KernelSpec::matern(1.5, 1.0);
  const auto horizon = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(tvkb::greedy_info_gain(k, grid, horizon, 0.1).gamma);
  }
}
BENCHMARK(BM_GreedyInfoGain)->Arg(64)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace
