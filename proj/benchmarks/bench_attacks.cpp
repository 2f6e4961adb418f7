#include <benchmark/benchmark.h>

#include "verilab/datasets.hpp"
#include "verilab/models.hpp"
#include "verilab/perturb.hpp"
#include "verilab/risk.hpp"

namespace {

using namespace verilab;

Dataset gaussians(std::size_t n) {
  SyntheticSpec s;
  s.samples = n;
  s.seed = 1;
  s.means = {{-1.0, 0.0}, {1.0, 0.0}};
  s.stddevs = {1.0, 1.0};
  return gen_synthetic(s);
}

const ModelSpec kSpec{ModelKind::mlp, {2, 32, 32, 2}};
const ThreatModel kThreat{Norm::linf, 0.3, ClampRange::unclamped()};

void BM_PgdSingle(benchmark::State& state) {
  const ModelParams params = init_params(kSpec, 2);
  AttackConfig cfg = AttackConfig::evaluation(Objective::adversarial_untargeted, kThreat.eps);
  cfg.early_exit = false;
  const std::vector<double> x{0.1, -0.2};
  for (auto _ : state) benchmark::DoNotOptimize(pgd(kSpec, params, x, 0, kThreat, cfg));
}
BENCHMARK(BM_PgdSingle);

void BM_PgdRows(benchmark::State& state) {
  const ModelParams params = init_params(kSpec, 2);
  const Dataset data = gaussians(static_cast<std::size_t>(state.range(0)));
  AttackConfig cfg = AttackConfig::evaluation(Objective::hypocritical, kThreat.eps);
  std::vector<std::uint64_t> streams(data.size());
  for (std::size_t i = 0; i < streams.size(); ++i) streams[i] = i;
  for (auto _ : state)
    benchmark::DoNotOptimize(pgd_rows(kSpec, params, data.inputs, data.labels, {}, streams, kThreat, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PgdRows)->Arg(32)->Arg(512);

void BM_BuildLedger(benchmark::State& state) {
  const ModelParams params = init_params(kSpec, 2);
  const Dataset data = gaussians(500);
  const AttackSuite suite = AttackSuite::evaluation(kThreat.eps);
  for (auto _ : state) benchmark::DoNotOptimize(build_ledger(kSpec, params, data, kThreat, suite));
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_BuildLedger)->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& state) {
  const ModelSpec spec{ModelKind::mlp, {2, 16, 2}};
  const ModelParams params = init_params(spec, 3);
  const std::vector<double> x{0.1, -0.2};
  const auto grid = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(brute_force_attack(spec, params, x, 0, kThreat, Objective::stability, grid));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid * grid));
}
BENCHMARK(BM_BruteForce)->Arg(51)->Arg(201)->Unit(benchmark::kMillisecond);

}  // namespace
