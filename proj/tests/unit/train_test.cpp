#include <doctest.h>

#include "oracles.hpp"
#include "verilab/datasets.hpp"
#include "verilab/error.hpp"
#include "verilab/ops.hpp"
#include "verilab/train.hpp"

using namespace verilab;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::contract;
}

Dataset separable(std::size_t n, std::uint64_t seed) {
  SyntheticSpec s;
  s.kind = SyntheticKind::gaussians;
  s.samples = n;
  s.seed = seed;
  s.means = {{-2.0, 0.0}, {2.0, 0.0}};
  s.stddevs = {0.4, 0.4};
  return gen_synthetic(s);
}

TrainConfig robust_config(TrainMethod method, double eps) {
  TrainConfig cfg;
  cfg.method = method;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.lr = 0.05;
  TrainAttack attack;
  attack.threat = {Norm::linf, eps, ClampRange::unclamped()};
  attack.attack = AttackConfig::training(inner_objective(method), eps, 4);
  cfg.attack = attack;
  return cfg;
}

// Loss written from the definitions with the forward pass only.
double reference_loss(const ModelSpec& spec, const ModelParams& p, TrainMethod method, double lambda, const Tensor& x,
                      const std::vector<int>& y, const Tensor& inner) {
  const Tensor clean = forward_logits(spec, p, x);
  if (method == TrainMethod::pgd_at) return cross_entropy(forward_logits(spec, p, inner), y);
  double loss = cross_entropy(clean, y);
  if (method != TrainMethod::standard && lambda != 0.0) loss += lambda * kl_divergence(clean, forward_logits(spec, p, inner));
  return loss;
}

}  // namespace

TEST_CASE("method names") {
  CHECK(parse_train_method("thrm") == TrainMethod::thrm);
  CHECK(to_string(TrainMethod::pgd_at) == "pgd_at");
  CHECK(kind_of([] { parse_train_method("mart"); }) == ErrorKind::config);
  CHECK(inner_objective(TrainMethod::trades) == Objective::stability);
  CHECK(inner_objective(TrainMethod::thrm) == Objective::hypocritical);
}

TEST_CASE("batch loss gradients match finite differences with a frozen inner point") {
  const ModelSpec spec{ModelKind::mlp, {2, 6, 3}};
  Rng rng(17);
  for (TrainMethod method : {TrainMethod::standard, TrainMethod::pgd_at, TrainMethod::trades, TrainMethod::thrm}) {
    for (int t = 0; t < 5; ++t) {
      const ModelParams params = oracle::random_params(spec, 40 + t);
      Tensor x(Shape{5, 2}), inner(Shape{5, 2});
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.uniform(-1, 1);
        inner[i] = x[i] + rng.uniform(-0.2, 0.2);
      }
      std::vector<int> y(5);
      for (int& v : y) v = static_cast<int>(rng.below(3));
      const double lambda = 2.5;
      const BatchLoss bl = batch_loss(spec, params, method, lambda, x, y, inner);
      CHECK(bl.loss == doctest::Approx(reference_loss(spec, params, method, lambda, x, y, inner)).epsilon(1e-12));
      const auto fd = oracle::central_difference(
          [&](const std::vector<double>& theta) {
            ModelParams p = params;
            p.assign_flat(theta);
            return reference_loss(spec, p, method, lambda, x, y, inner);
          },
          params.flatten());
      CHECK(oracle::relative_error(bl.gradient, fd) < 1e-6);
    }
  }
}

TEST_CASE("collapse identities hold bitwise") {
  const ModelSpec spec{ModelKind::mlp, {2, 5, 2}};
  const ModelParams params = oracle::random_params(spec, 2);
  const Dataset data = separable(20, 1);
  const BatchLoss standard = batch_loss(spec, params, TrainMethod::standard, 0.0, data.inputs, data.labels, {});
  for (TrainMethod method : {TrainMethod::trades, TrainMethod::thrm}) {
    TrainConfig cfg = robust_config(method, 0.3);
    cfg.lambda = 0.0;
    std::vector<std::uint64_t> streams(data.size());
    const Tensor inner = inner_points(spec, params, cfg, data.inputs, data.labels, streams, 1);
    const BatchLoss bl = batch_loss(spec, params, method, 0.0, data.inputs, data.labels, inner);
    CHECK(bl.loss == standard.loss);
    CHECK(bl.gradient == standard.gradient);
  }
  TrainConfig cfg = robust_config(TrainMethod::pgd_at, 0.0);
  cfg.attack->attack.step_size = 0.0;
  std::vector<std::uint64_t> streams(data.size());
  const Tensor inner = inner_points(spec, params, cfg, data.inputs, data.labels, streams, 1);
  CHECK(inner == data.inputs);
  const BatchLoss at = batch_loss(spec, params, TrainMethod::pgd_at, 1.0, data.inputs, data.labels, inner);
  CHECK(at.loss == standard.loss);
  CHECK(at.gradient == standard.gradient);
}

TEST_CASE("standard training separates well-separated gaussians") {
  const ModelSpec spec{ModelKind::mlp, {2, 16, 2}};
  const Dataset data = separable(400, 5);
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.batch_size = 32;
  cfg.lr = 0.05;
  const TrainResult result = train(spec, init_params(spec, 1), data, cfg);
  REQUIRE(result.metrics.size() == 15);
  CHECK(result.metrics.back().train_accuracy >= 0.99);
  CHECK(result.metrics.back().mean_loss < result.metrics.front().mean_loss);
}

TEST_CASE("training is deterministic and independent of worker count") {
  const ModelSpec spec{ModelKind::mlp, {2, 8, 2}};
  const Dataset data = separable(120, 7);
  for (TrainMethod method : {TrainMethod::pgd_at, TrainMethod::trades, TrainMethod::thrm}) {
    TrainConfig cfg = robust_config(method, 0.3);
    cfg.lambda = 2.0;
    cfg.monitor_every = 1;
    cfg.monitor_samples = 40;
    const TrainResult a = train(spec, init_params(spec, 3), data, cfg);
    cfg.workers = 3;
    const TrainResult b = train(spec, init_params(spec, 3), data, cfg);
    CHECK(a.params == b.params);
    CHECK(format_metrics_line(a.metrics.back()) == format_metrics_line(b.metrics.back()));
    CHECK(a.metrics.back().adv_accuracy.has_value());
  }
}

TEST_CASE("learning rate schedule") {
  TrainConfig cfg;
  cfg.lr = 0.1;
  cfg.lr_decay_epochs = {3, 5};
  CHECK(cfg.lr_at(2) == 0.1);
  CHECK(cfg.lr_at(3) == doctest::Approx(0.01));
  CHECK(cfg.lr_at(6) == doctest::Approx(0.001));
  EpochMetrics m{2, 0.1, 0.5, 0.75, std::nullopt, std::nullopt};
  CHECK(format_metrics_line(m) == "epoch=2 lr=0.1 loss=0.5 train_acc=0.75");
}

TEST_CASE("configuration and numeric errors") {
  const ModelSpec spec{ModelKind::mlp, {2, 4, 2}};
  const Dataset data = separable(30, 1);
  TrainConfig cfg;
  cfg.method = TrainMethod::thrm;
  CHECK(kind_of([&] { train(spec, init_params(spec, 0), data, cfg); }) == ErrorKind::config);
  cfg = TrainConfig{};
  cfg.lr = -1;
  CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::config);
  cfg = TrainConfig{};
  cfg.lr = 1e200;
  cfg.epochs = 5;
  CHECK(kind_of([&] { train(spec, init_params(spec, 0), data, cfg); }) == ErrorKind::numeric);
  CHECK(kind_of([&] { train(spec, init_params(spec, 0), Dataset{Tensor(Shape{0, 2}), {}, 2, {}}, TrainConfig{}); }) ==
        ErrorKind::contract);
}

TEST_CASE("lambda sweep") {
  const ModelSpec spec{ModelKind::mlp, {2, 8, 2}};
  const Dataset data = separable(80, 2), heldout = separable(40, 3);
  TrainConfig cfg = robust_config(TrainMethod::thrm, 0.3);
  const ThreatModel threat{Norm::linf, 0.3, ClampRange::unclamped()};
  const AttackSuite suite = AttackSuite::evaluation(0.3);
  const ModelParams init = init_params(spec, 6);
  const std::vector<double> lambdas{0.0, 4.0, 1.0};
  const auto sweep = lambda_sweep(spec, init, data, heldout, cfg, lambdas, threat, suite);
  REQUIRE(sweep.size() == 3);
  CHECK(sweep[1].lambda == 4.0);
  CHECK(sweep[2].lambda == 1.0);
  TrainConfig standard = cfg;
  standard.method = TrainMethod::standard;
  CHECK(sweep[0].params == train(spec, init, data, standard).params);
  CHECK(sweep[0].report.n == 40);
  CHECK(kind_of([&] { lambda_sweep(spec, init, data, heldout, cfg, {}, threat, suite); }) == ErrorKind::config);
}
