#include <benchmark/benchmark.h>

#include <vector>

#include "verilab/analytic.hpp"

namespace {

using namespace verilab;

void BM_Example1Table(benchmark::State& state) {
  const Rational eps(1, 10);
  for (auto _ : state) benchmark::DoNotOptimize(example1_table(eps));
}
BENCHMARK(BM_Example1Table);

void BM_Example2Curves(benchmark::State& state) {
  Example2Setup setup;
  setup.resolution = static_cast<std::size_t>(state.range(0));
  const std::vector<double> b_grid{0.2, 0.5, 0.8};
  for (auto _ : state) benchmark::DoNotOptimize(example2_curves(b_grid, setup));
}
BENCHMARK(BM_Example2Curves)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Example1Sampler(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(example1_sampler_consistency(ToyClassifier::all_one, 10000, 3, Rational(1, 10)));
}
BENCHMARK(BM_Example1Sampler)->Unit(benchmark::kMillisecond);

}  // namespace
