#include <benchmark/benchmark.h>

#include "tvkb/kernel.hpp"
#include "tvkb/rng.hpp"

namespace {

std::vector<tvkb::Point> random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
  tvkb::SplitMix64 rng(seed);
  std::vector<tvkb::Point> out;
  for (std::size_t i = 0; i < n; ++i) {
    tvkb::Point p(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < p.size(); ++j) p[j] = rng.unit();
    out.push_back(p);
  }
  return out;
}

void BM_KernelEval(benchmark::State& state) {
  const auto k = state.range(0) == 0 ? tvkb::KernelSpec::squared_exponential(0.3)
                                     : tvkb::KernelSpec::matern(static_cast<double>(state.range(0)) - 0.5, 0.3);
  const auto xs = random_points(256, 3, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tvkb::kernel_eval(k, xs[i % 256], xs[(i + 1) % 256]));
    ++i;
  }
}
BENCHMARK(BM_KernelEval)->Arg(0)->Arg(1)->Arg(2)->Arg(3)->Arg(4);

void BM_GramFactor(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto xs = random_points(n, 2, 2);
  const auto k = tvkb::KernelSpec::matern(2.5, 0.2);
  for (auto _ : state) {
    auto a = tvkb::gram_matrix(k, xs, 0.01);
    benchmark::DoNotOptimize(tvkb::factorize_with_jitter(a).lower.data());
  }
}
BENCHMARK(BM_GramFactor)->RangeMultiplier(4)->Range(16, 1024);

}  // namespace
