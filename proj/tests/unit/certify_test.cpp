#include <doctest.h>

#include "oracles.hpp"
#include "verilab/certify.hpp"
#include "verilab/error.hpp"

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

Dataset random_points(std::uint64_t seed, std::size_t n, int classes) {
  Rng rng(seed);
  Dataset d;
  d.inputs = Tensor(Shape{n, 2});
  for (double& v : d.inputs.data()) v = rng.uniform();
  for (std::size_t i = 0; i < n; ++i) d.labels.push_back(static_cast<int>(rng.below(classes)));
  d.num_classes = classes;
  return d;
}

const ModelSpec kNet{ModelKind::linf_dist_net, {2, 6, 3}};

}  // namespace

TEST_CASE("only l-infinity distance nets are certified") {
  const ModelSpec mlp{ModelKind::mlp, {2, 4, 3}};
  const Dataset d = random_points(1, 10, 3);
  CHECK(kind_of([&] { certify_hypocritical(mlp, init_params(mlp, 0), d, 0.1); }) == ErrorKind::contract);
  CHECK(kind_of([&] { certify_adversarial(mlp, init_params(mlp, 0), d, 0.1); }) == ErrorKind::contract);
}

TEST_CASE("eps = 0 certificates") {
  const ModelParams params = oracle::random_params(kNet, 3);
  const Dataset d = random_points(2, 200, 3);
  const CertReport c = certify(kNet, params, d, 0.0);
  REQUIRE(c.cert_hyp_upper_Dminus.defined());
  CHECK(c.cert_hyp_upper_Dminus.count == 0);
  const auto pred = predict(forward_logits(kNet, params, d.inputs));
  std::size_t strict_correct = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto g = forward_logits(kNet, params, d.inputs).row(i);
    bool strict = true;
    for (std::size_t k = 0; k < 3; ++k)
      if (static_cast<int>(k) != d.labels[i] && g[k] >= g[static_cast<std::size_t>(d.labels[i])]) strict = false;
    strict_correct += strict;
    CHECK(c.margins[i] >= 0.0);
    CHECK(c.nat_wrong[i] == (pred[i] != d.labels[i]));
  }
  CHECK(c.cert_adv_lower.count == strict_correct);
}

TEST_CASE("large margins are excluded from the bound") {
  // two units at the corners; g = -distance, so points near a corner have a clear winner
  ModelParams params = ModelParams::zeros({ModelKind::linf_dist_net, {2, 2}});
  params.layers()[0].weight = Tensor::matrix({{0.0, 0.0}, {1.0, 1.0}});
  const ModelSpec spec{ModelKind::linf_dist_net, {2, 2}};
  Dataset d;
  d.inputs = Tensor::matrix({{0.0, 0.0}, {1.0, 1.0}});
  d.labels = {1, 0};
  const CertReport c = certify(spec, params, d, 0.4);
  CHECK(c.margins == std::vector<double>{1.0, 1.0});
  CHECK(c.cert_hyp_upper_Dminus.count == 0);
  CHECK(certify(spec, params, d, 0.5).cert_hyp_upper_Dminus.count == 0);
  CHECK(certify(spec, params, d, 0.5000001).cert_hyp_upper_Dminus.count == 2);
}

TEST_CASE("certificates are monotone in eps") {
  const ModelParams params = oracle::random_params(kNet, 4);
  const Dataset d = random_points(5, 300, 3);
  std::size_t prev_hyp = 0, prev_adv = d.size();
  for (double eps : {0.0, 0.01, 0.03, 0.05, 0.1, 0.2, 0.5}) {
    const CertReport c = certify(kNet, params, d, eps);
    CHECK(c.cert_hyp_upper_Dminus.count >= prev_hyp);
    CHECK(c.cert_adv_lower.count <= prev_adv);
    prev_hyp = c.cert_hyp_upper_Dminus.count;
    prev_adv = c.cert_adv_lower.count;
  }
}

TEST_CASE("exhaustive search respects the certificates") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const ModelParams params = oracle::random_params(kNet, seed);
    const Dataset d = random_points(seed + 50, 30, 3);
    const double eps = 0.05;
    const ThreatModel threat{Norm::linf, eps, {0.0, 1.0}};
    const CertReport c = certify(kNet, params, d, eps);
    const auto g = forward_logits(kNet, params, d.inputs);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto x = d.inputs.row(i);
      if (c.nat_wrong[i] && c.margins[i] >= 2 * eps)
        CHECK(!brute_force_attack(kNet, params, x, d.labels[i], threat, Objective::hypocritical, 101));
      double other = -1e300;
      for (std::size_t k = 0; k < 3; ++k)
        if (static_cast<int>(k) != d.labels[i]) other = std::max(other, g.at(i, k));
      if (g.at(i, static_cast<std::size_t>(d.labels[i])) - other > 2 * eps)
        CHECK(!brute_force_attack(kNet, params, x, d.labels[i], threat, Objective::adversarial_untargeted, 101));
    }
  }
}

TEST_CASE("soundness gate") {
  const ModelParams params = oracle::random_params(kNet, 8);
  const Dataset d = random_points(9, 100, 3);
  const double eps = 0.05;
  CertReport c = certify(kNet, params, d, eps);
  const ThreatModel threat{Norm::linf, eps, {0.0, 1.0}};
  attach_empirical(c, estimate_risks(build_ledger(kNet, params, d, threat, AttackSuite::evaluation(eps))));
  CHECK_NOTHROW(check_soundness(c));
  CHECK(*c.emp_hyp_Dminus <= *c.cert_hyp_upper_Dminus.value());
  CHECK(*c.emp_adv_acc >= *c.cert_adv_lower.value());

  CertReport broken = c;
  broken.emp_hyp_Dminus = 1.0;
  broken.cert_hyp_upper_Dminus = {0, 10};
  CHECK(kind_of([&] { check_soundness(broken); }) == ErrorKind::contract);

  // 1 - 1/3 and 2/3 differ in the last bit
  CertReport tight;
  tight.margins.assign(3, 0.0);
  tight.cert_adv_lower = {2, 3};
  RiskReport emp;
  emp.n = 3;
  emp.adv_D = {1, 3};
  attach_empirical(tight, emp);
  CHECK(*tight.emp_adv_acc == *tight.cert_adv_lower.value());
  CHECK_NOTHROW(check_soundness(tight));

  const Report doc = cert_report_document(c);
  for (const char* key : {"cert_hyp_upper_Dminus", "cert_adv_lower", "emp_hyp_Dminus", "emp_adv_acc", "eps"})
    CHECK(doc.contains(key));
}
