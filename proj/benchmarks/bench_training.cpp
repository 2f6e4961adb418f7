#include <benchmark/benchmark.h>

#include "verilab/datasets.hpp"
#include "verilab/train.hpp"

namespace {

using namespace verilab;

void BM_TrainEpoch(benchmark::State& state) {
  const auto method = static_cast<TrainMethod>(state.range(0));
  const ModelSpec spec{ModelKind::mlp, {2, 32, 32, 2}};
  SyntheticSpec s;
  s.samples = 512;
  s.seed = 1;
  s.means = {{-1.0, 0.0}, {1.0, 0.0}};
  s.stddevs = {1.0, 1.0};
  const Dataset data = gen_synthetic(s);
  TrainConfig cfg;
  cfg.method = method;
  cfg.epochs = 1;
  cfg.batch_size = 64;
  cfg.lr = 0.05;
  if (method != TrainMethod::standard) {
    const ThreatModel threat{Norm::linf, 0.3, ClampRange::unclamped()};
    cfg.attack = TrainAttack{threat, AttackConfig::training(inner_objective(method), threat.eps)};
  }
  const ModelParams init = init_params(spec, 2);
  for (auto _ : state) benchmark::DoNotOptimize(train(spec, init, data, cfg));
  state.SetLabel(to_string(method));
}
BENCHMARK(BM_TrainEpoch)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace
