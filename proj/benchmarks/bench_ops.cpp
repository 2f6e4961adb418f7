#include <benchmark/benchmark.h>

#include "verilab/autodiff.hpp"
#include "verilab/models.hpp"
#include "verilab/ops.hpp"
#include "verilab/rng.hpp"

namespace {

using namespace verilab;

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

void BM_Affine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_tensor({n, 64}, 1), w = random_tensor({64, 64}, 2), b = random_tensor({64}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(affine(x, w, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Affine)->Arg(32)->Arg(256)->Arg(2048);

void BM_LinfLayer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_tensor({n, 64}, 1), w = random_tensor({64, 64}, 2), b = random_tensor({64}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(linf_layer(x, w, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_LinfLayer)->Arg(32)->Arg(256);

void BM_ForwardBackward(benchmark::State& state) {
  const ModelKind kind = state.range(0) == 0 ? ModelKind::mlp : ModelKind::linf_dist_net;
  const ModelSpec spec{kind, {2, 64, 64, 2}};
  const ModelParams params = init_params(spec, 4);
  const Tensor x = random_tensor({128, 2}, 5);
  std::vector<int> y(128);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 2);
  for (auto _ : state) {
    Graph g;
    const BoundModel bound = bind_params(g, spec, params, true);
    g.backward(g.cross_entropy(logits_node(g, spec, bound, g.constant(x)), y));
    benchmark::DoNotOptimize(gather_gradient(g, bound));
  }
  state.SetLabel(to_string(kind));
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(1);

}  // namespace
