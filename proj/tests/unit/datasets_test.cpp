#include <doctest.h>

#include "oracles.hpp"
#include "verilab/datasets.hpp"
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

std::string error_text(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

SyntheticSpec gaussians(std::size_t n, std::uint64_t seed) {
  SyntheticSpec s;
  s.kind = SyntheticKind::gaussians;
  s.samples = n;
  s.seed = seed;
  s.means = {{-1.0, 0.0}, {1.0, 0.0}};
  s.stddevs = {0.5, 0.5};
  return s;
}

}  // namespace

TEST_CASE("gaussian generator") {
  const Dataset d = gen_synthetic(gaussians(4000, 3));
  CHECK(d.size() == 4000);
  CHECK(d.dim() == 2);
  CHECK(d.clamp == ClampRange::unclamped());
  CHECK(d == gen_synthetic(gaussians(4000, 3)));
  CHECK(!(d == gen_synthetic(gaussians(4000, 4))));
  double sum[2] = {0, 0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < d.size(); ++i) {
    sum[d.labels[i]] += d.inputs.at(i, 0);
    ++count[d.labels[i]];
  }
  CHECK(sum[0] / count[0] == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(sum[1] / count[1] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(static_cast<double>(count[1]) / 4000 - 0.5) < 0.04);
  SyntheticSpec bad = gaussians(10, 0);
  bad.stddevs = {1.0};
  CHECK(kind_of([&] { gen_synthetic(bad); }) == ErrorKind::config);
  SyntheticSpec empty = gaussians(0, 0);
  CHECK(gen_synthetic(empty).inputs.shape() == Shape{0, 2});
}

TEST_CASE("piecewise one-dimensional generator") {
  SyntheticSpec s;
  s.kind = SyntheticKind::d1_piecewise;
  s.samples = 40000;
  s.seed = 1;
  s.interval_eps = 0.1;
  const Dataset d = gen_synthetic(s);
  CHECK(d.dim() == 1);
  CHECK(d.clamp == ClampRange{0.0, 1.0});
  std::size_t even = 0, even_pos = 0, odd = 0, odd_pos = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = d.inputs[i];
    CHECK((x >= 0.0 && x < 1.0));
    const bool is_odd = static_cast<int>(std::floor(x / 0.1)) % 2 == 1;
    (is_odd ? odd : even)++;
    (is_odd ? odd_pos : even_pos) += d.labels[i] == 1;
  }
  CHECK(static_cast<double>(even_pos) / even == doctest::Approx(0.25).epsilon(0.06));
  CHECK(odd_pos == odd);
  CHECK(piecewise_positive_rate(0.05, 0.1) == 0.25);
  CHECK(piecewise_positive_rate(0.15, 0.1) == 1.0);
  CHECK(class_of_sign(1) == 1);
  CHECK(sign_of_class(0) == -1);
}

TEST_CASE("circle oracle generator") {
  SyntheticSpec s;
  s.kind = SyntheticKind::circle_oracle;
  s.samples = 5000;
  s.seed = 2;
  const Dataset d = gen_synthetic(s);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double dx = d.inputs.at(i, 0) - 0.5, dy = d.inputs.at(i, 1) - 0.5;
    CHECK(d.labels[i] == (dx * dx + dy * dy < 0.16 ? 1 : 0));
    positives += d.labels[i];
  }
  // disc area pi * 0.16
  CHECK(static_cast<double>(positives) / 5000 == doctest::Approx(0.50265).epsilon(0.05));
}

TEST_CASE("quality, noise and mislabeling variants") {
  SyntheticSpec s;
  s.kind = SyntheticKind::circle_oracle;
  s.samples = 2000;
  const Dataset clean = gen_synthetic(s);
  CHECK(make_quality(clean) == clean);
  CHECK(encode_dataset(make_quality(clean)) == encode_dataset(clean));

  const Dataset noise = make_noise(clean, 5);
  CHECK(noise.labels == clean.labels);
  for (double v : noise.inputs.values()) CHECK((v >= 0.0 && v <= 1.0));
  CHECK(!(noise.inputs == clean.inputs));
  CHECK(kind_of([] { make_noise(gen_synthetic(gaussians(10, 0)), 1); }) == ErrorKind::config);

  const Dataset mis = make_mislabeling(clean, 6);
  CHECK(mis.inputs == clean.inputs);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) changed += mis.labels[i] != clean.labels[i];
  CHECK(static_cast<double>(changed) / 2000 == doctest::Approx(0.5).epsilon(0.1));
  CHECK(mis == make_mislabeling(clean, 6));
  CHECK(parse_flaw("poisoning") == Flaw::poisoning);
  CHECK(kind_of([] { parse_flaw("blur"); }) == ErrorKind::config);
}

TEST_CASE("poisoning pushes inputs toward the permuted class within the ball") {
  SyntheticSpec s;
  s.kind = SyntheticKind::circle_oracle;
  s.samples = 200;
  s.seed = 8;
  const Dataset clean = gen_synthetic(s);
  const ModelSpec spec{ModelKind::mlp, {2, 8, 2}};
  const ModelParams params = oracle::random_params(spec, 3);
  PoisoningConfig cfg;
  cfg.threat = {Norm::linf, 0.1, {0.0, 1.0}};
  cfg.steps = 20;
  const Dataset poisoned = make_poisoning(clean, spec, params, cfg);
  CHECK(poisoned.labels == clean.labels);
  for (std::size_t i = 0; i < clean.size(); ++i)
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(std::abs(poisoned.inputs.at(i, k) - clean.inputs.at(i, k)) <= 0.1 + 1e-12);
      CHECK((poisoned.inputs.at(i, k) >= 0.0 && poisoned.inputs.at(i, k) <= 1.0));
    }
  // the reference model predicts the shifted class more often after poisoning
  const auto before = predict(forward_logits(spec, params, clean.inputs));
  const auto after = predict(forward_logits(spec, params, poisoned.inputs));
  std::size_t hit_before = 0, hit_after = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    hit_before += before[i] == 1 - clean.labels[i];
    hit_after += after[i] == 1 - clean.labels[i];
  }
  CHECK(hit_after >= hit_before);
  CHECK(cyclic_permutation(3) == std::vector<int>{1, 2, 0});
  cfg.permutation = {0, 1};
  CHECK(kind_of([&] { make_poisoning(clean, spec, params, cfg); }) == ErrorKind::config);
}

TEST_CASE("binary dataset round trip and corruption") {
  const Dataset d = gen_synthetic(gaussians(37, 1));
  const std::string bytes = encode_dataset(d);
  CHECK(decode_dataset(bytes) == d);
  CHECK(kind_of([&] { decode_dataset(bytes.substr(0, 30)); }) == ErrorKind::parse);
  CHECK(kind_of([&] { decode_dataset(bytes + "z"); }) == ErrorKind::parse);
  CHECK(error_text([&] { decode_dataset(bytes.substr(0, 30)); }).find("offset") != std::string::npos);
  std::string wrong_magic = bytes;
  wrong_magic[0] = 'X';
  CHECK(kind_of([&] { decode_dataset(wrong_magic); }) == ErrorKind::parse);
  CHECK(kind_of([] { load_dataset("/nonexistent/data.vlds"); }) == ErrorKind::io);
  const auto path = std::filesystem::temp_directory_path() / "verilab_datasets_test.vlds";
  save_dataset(d, path);
  CHECK(load_dataset(path) == d);
  std::filesystem::remove(path);
}

TEST_CASE("text datasets") {
  const Dataset d = parse_dataset_text("# header\n1,0.5,0.25\n\n0,1.5,-2\n");
  CHECK(d.size() == 2);
  CHECK(d.labels == std::vector<int>{1, 0});
  CHECK(d.inputs.at(1, 1) == -2.0);
  CHECK(d.num_classes == 2);
  CHECK(parse_dataset_text("2,1\n", 4).num_classes == 4);
  CHECK(kind_of([] { parse_dataset_text("1,0.5\n0\n"); }) == ErrorKind::parse);
  CHECK(kind_of([] { parse_dataset_text("1,abc\n"); }) == ErrorKind::parse);
  CHECK(error_text([] { parse_dataset_text("1,0.5\n1,x\n"); }).find("line 2") != std::string::npos);
  CHECK(kind_of([] { parse_dataset_text("5,0.5\n", 3); }) == ErrorKind::parse);
}
