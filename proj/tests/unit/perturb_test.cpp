#include <doctest.h>

#include "oracles.hpp"
#include "verilab/error.hpp"
#include "verilab/perturb.hpp"

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

// Linear two-class model: logits (0, x0 - 0.5), so class 1 iff x0 > 0.5.
struct Threshold {
  ModelSpec spec{ModelKind::mlp, {2, 2, 2}};
  ModelParams params;
  Threshold() {
    params = ModelParams::zeros(spec);
    auto& l = params.layers();
    l[0].weight = Tensor::matrix({{1.0, 0.0}, {0.0, 0.0}});
    l[1].weight = Tensor::matrix({{0.0, 1.0}, {0.0, 0.0}});
    l[1].bias = Tensor::vector({0.0, -0.5});
  }
};

double linf_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("objective predicates") {
  CHECK(objective_met(Objective::hypocritical, 1, 1, -1, 0));
  CHECK(!objective_met(Objective::hypocritical, 0, 1, -1, 0));
  CHECK(objective_met(Objective::adversarial_untargeted, 0, 1, -1, 1));
  CHECK(objective_met(Objective::adversarial_targeted, 2, 0, 2, 0));
  CHECK(!objective_met(Objective::adversarial_targeted, 1, 0, 2, 0));
  CHECK(objective_met(Objective::stability, 1, 0, -1, 0));
  CHECK(!objective_met(Objective::stability, 0, 1, -1, 0));
  CHECK(parse_objective("targeted") == Objective::adversarial_targeted);
  CHECK(parse_norm("l2") == Norm::l2);
  CHECK(kind_of([] { parse_norm("l1"); }) == ErrorKind::config);
}

TEST_CASE("presets") {
  CHECK(ThreatModel::cifar_linf().eps == 8.0 / 255.0);
  CHECK(ThreatModel::cifar_l2().eps == 0.5);
  const auto eval = AttackConfig::evaluation(Objective::hypocritical, 0.4);
  CHECK(eval.steps == 20);
  CHECK(eval.step_size == 0.1);
  CHECK(!eval.random_start);
  const auto train = AttackConfig::training(Objective::stability, 0.4);
  CHECK(train.steps == 10);
  CHECK(train.random_start);
}

TEST_CASE("hypocritical attack crosses a known threshold") {
  const Threshold m;
  ThreatModel threat{Norm::linf, 0.2, {0.0, 1.0}};
  const auto cfg = AttackConfig::evaluation(Objective::hypocritical, threat.eps);
  const std::vector<double> near{0.4, 0.5}, far{0.1, 0.5};
  // true label 1 but predicted 0
  CHECK(pgd(m.spec, m.params, near, 1, threat, cfg).success);
  CHECK(!pgd(m.spec, m.params, far, 1, threat, cfg).success);
  CHECK(brute_force_attack(m.spec, m.params, near, 1, threat, Objective::hypocritical, 11));
  CHECK(!brute_force_attack(m.spec, m.params, far, 1, threat, Objective::hypocritical, 11));
  threat.norm = Norm::l2;
  CHECK(pgd(m.spec, m.params, near, 1, threat, AttackConfig::evaluation(Objective::hypocritical, 0.2)).success);
  CHECK(brute_force_attack(m.spec, m.params, near, 1, threat, Objective::hypocritical, 3));
}

TEST_CASE("attack points stay in the ball and the clamp box") {
  const ModelSpec spec{ModelKind::mlp, {3, 8, 3}};
  const ModelParams params = oracle::random_params(spec, 4);
  Rng rng(10);
  for (Norm norm : {Norm::linf, Norm::l2}) {
    for (Objective obj : {Objective::hypocritical, Objective::adversarial_untargeted, Objective::stability}) {
      const ThreatModel threat{norm, 0.3, {0.0, 1.0}};
      AttackConfig cfg = AttackConfig::training(obj, threat.eps, 3);
      cfg.restarts = 2;
      for (int t = 0; t < 10; ++t) {
        const std::vector<double> x{rng.uniform(), rng.uniform(), rng.uniform()};
        const auto r = pgd(spec, params, x, static_cast<int>(rng.below(3)), threat, cfg, t);
        const double dist = norm == Norm::linf ? linf_distance(r.point, x) : l2_distance(r.point, x);
        CHECK(dist <= threat.eps + 1e-12);
        for (double v : r.point) CHECK((v >= 0.0 && v <= 1.0));
      }
    }
  }
}

TEST_CASE("eps = 0 returns the clean point") {
  const ModelSpec spec{ModelKind::mlp, {2, 4, 2}};
  const ModelParams params = oracle::random_params(spec, 1);
  const ThreatModel threat{Norm::linf, 0.0, {0.0, 1.0}};
  const std::vector<double> x{0.3, 0.7};
  for (Objective obj : {Objective::hypocritical, Objective::adversarial_untargeted, Objective::stability}) {
    const auto r = pgd(spec, params, x, 0, threat, AttackConfig::evaluation(obj, 0.0));
    CHECK(r.point == x);
  }
}

TEST_CASE("preconditions") {
  const Threshold m;
  const ThreatModel threat{Norm::linf, 0.1, {0.0, 1.0}};
  const std::vector<double> x{0.4, 0.5}, outside{1.5, 0.5};
  CHECK(kind_of([&] { pgd(m.spec, m.params, outside, 0, threat, AttackConfig::evaluation(Objective::stability, 0.1)); }) ==
        ErrorKind::contract);
  CHECK(kind_of([&] {
          pgd(m.spec, m.params, x, 0, threat, AttackConfig::evaluation(Objective::adversarial_targeted, 0.1));
        }) == ErrorKind::config);
  const ModelSpec big{ModelKind::mlp, {3, 2, 2}};
  const std::vector<double> x3{0.5, 0.5, 0.5};
  CHECK(kind_of([&] {
          brute_force_attack(big, init_params(big, 0), x3, 0, threat, Objective::stability, 101);
        }) == ErrorKind::resource);
  AttackConfig zero_step = AttackConfig::evaluation(Objective::stability, 0.1);
  zero_step.step_size = 0.0;
  CHECK(kind_of([&] { zero_step.validate(threat); }) == ErrorKind::config);
}

TEST_CASE("batched attacks equal per-row attacks for any worker count") {
  const ModelSpec spec{ModelKind::mlp, {2, 6, 3}};
  const ModelParams params = oracle::random_params(spec, 12);
  Dataset data;
  Rng rng(1);
  const std::size_t n = 70;
  data.inputs = Tensor(Shape{n, 2});
  for (double& v : data.inputs.data()) v = rng.uniform();
  for (std::size_t i = 0; i < n; ++i) data.labels.push_back(static_cast<int>(rng.below(3)));
  data.num_classes = 3;
  const ThreatModel threat{Norm::linf, 0.1, {0.0, 1.0}};
  AttackConfig cfg = AttackConfig::training(Objective::stability, 0.1, 5);
  cfg.restarts = 2;
  const auto serial = batch_attack(spec, params, data, threat, cfg, 1);
  const auto threaded = batch_attack(spec, params, data, threat, cfg, 3);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(serial[i].point == threaded[i].point);
    CHECK(serial[i].success == threaded[i].success);
    const auto single = pgd(spec, params, data.inputs.row(i), data.labels[i], threat, cfg, i);
    CHECK(single.point == serial[i].point);
  }
}

TEST_CASE("pgd success implies brute-force success on small instances") {
  const ModelSpec spec{ModelKind::mlp, {2, 6, 3}};
  int pgd_successes = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ModelParams params = oracle::random_params(spec, seed);
    Rng rng(seed + 100);
    const std::vector<double> x{rng.uniform(), rng.uniform()};
    const int y = static_cast<int>(rng.below(3));
    const int target = (y + 1) % 3;
    const ThreatModel threat{Norm::linf, 0.15, {0.0, 1.0}};
    for (Objective obj : {Objective::hypocritical, Objective::adversarial_untargeted, Objective::adversarial_targeted,
                          Objective::stability}) {
      AttackConfig cfg = AttackConfig::evaluation(obj, threat.eps);
      cfg.target = target;
      if (pgd(spec, params, x, y, threat, cfg).success) {
        ++pgd_successes;
        CHECK(brute_force_attack(spec, params, x, y, threat, obj, 81, target));
      }
    }
  }
  CHECK(pgd_successes > 0);
}
