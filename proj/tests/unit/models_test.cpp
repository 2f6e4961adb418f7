#include <doctest.h>

#include "oracles.hpp"
#include "verilab/error.hpp"
#include "verilab/models.hpp"

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

Tensor random_inputs(std::uint64_t seed, std::size_t n, std::size_t d) {
  Rng rng(seed);
  Tensor x(Shape{n, d});
  for (double& v : x.data()) v = rng.uniform();
  return x;
}

// Reference forward pass written directly from the layer definitions.
std::vector<double> reference_logits(const ModelSpec& spec, const ModelParams& params, std::span<const double> x) {
  std::vector<double> h(x.begin(), x.end());
  const auto& layers = params.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Tensor& w = layers[l].weight;
    const Tensor& b = layers[l].bias;
    std::vector<double> next(b.size());
    for (std::size_t j = 0; j < next.size(); ++j) {
      if (spec.kind == ModelKind::mlp) {
        double s = b[j];
        for (std::size_t k = 0; k < h.size(); ++k) s += h[k] * w.at(k, j);
        next[j] = (l + 1 < layers.size()) ? std::max(0.0, s) : s;
      } else {
        double m = 0.0;
        for (std::size_t k = 0; k < h.size(); ++k) m = std::max(m, std::abs(h[k] - w.at(j, k)));
        next[j] = m + b[j];
      }
    }
    h = std::move(next);
  }
  if (spec.kind == ModelKind::linf_dist_net)
    for (double& v : h) v = -v;
  return h;
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_NOTHROW(ModelSpec{ModelKind::mlp, {2, 4, 3}}.validate());
  CHECK_NOTHROW(ModelSpec{ModelKind::linf_dist_net, {2, 3}}.validate());
  CHECK(kind_of([] { ModelSpec{ModelKind::mlp, {2, 3}}.validate(); }) == ErrorKind::config);
  CHECK(kind_of([] { ModelSpec{ModelKind::mlp, {2, 0, 3}}.validate(); }) == ErrorKind::config);
  CHECK(kind_of([] { ModelSpec{ModelKind::linf_dist_net, {2, 1}}.validate(); }) == ErrorKind::config);
  CHECK(parse_model_kind("linf_dist_net") == ModelKind::linf_dist_net);
  CHECK(kind_of([] { parse_model_kind("cnn"); }) == ErrorKind::config);
}

TEST_CASE("parameter layout") {
  const ModelSpec mlp{ModelKind::mlp, {3, 5, 2}};
  CHECK(parameter_count(mlp) == 3 * 5 + 5 + 5 * 2 + 2);
  ModelParams p = init_params(mlp, 1);
  CHECK(p.count() == parameter_count(mlp));
  std::vector<double> flat = p.flatten();
  CHECK(flat.size() == p.count());
  flat[0] = 123.0;
  p.assign_flat(flat);
  CHECK(p.layers()[0].weight.at(0, 0) == 123.0);
  CHECK(kind_of([&] { p.assign_flat(std::vector<double>(3)); }) == ErrorKind::dimension);
  CHECK(init_params(mlp, 1) == init_params(mlp, 1));
  CHECK(!(init_params(mlp, 1) == init_params(mlp, 2)));
}

TEST_CASE("forward pass matches the reference for both kinds") {
  for (const ModelSpec& spec : {ModelSpec{ModelKind::mlp, {3, 6, 4, 3}}, ModelSpec{ModelKind::linf_dist_net, {3, 5, 4}}}) {
    const ModelParams params = oracle::random_params(spec, 9);
    const Tensor x = random_inputs(4, 7, 3);
    const Tensor logits = forward_logits(spec, params, x);
    CHECK(logits.shape() == Shape{7, spec.widths.back()});
    for (std::size_t i = 0; i < 7; ++i) {
      const auto ref = reference_logits(spec, params, x.row(i));
      for (std::size_t j = 0; j < ref.size(); ++j) CHECK(logits.at(i, j) == doctest::Approx(ref[j]).epsilon(1e-13));
    }
    Graph g;
    const BoundModel bound = bind_params(g, spec, params, false);
    CHECK(g.value(logits_node(g, spec, bound, g.constant(x))) == logits);
  }
  const ModelSpec spec{ModelKind::mlp, {3, 4, 2}};
  CHECK(kind_of([&] { forward_logits(spec, init_params(spec, 0), random_inputs(0, 2, 4)); }) == ErrorKind::dimension);
}

TEST_CASE("model gradient matches finite differences") {
  for (const ModelSpec& spec : {ModelSpec{ModelKind::mlp, {2, 5, 3}}, ModelSpec{ModelKind::linf_dist_net, {2, 4, 3}}}) {
    const ModelParams params = oracle::random_params(spec, 21);
    const Tensor x = random_inputs(8, 4, 2);
    const std::vector<int> y{0, 2, 1, 1};
    Graph g;
    const BoundModel bound = bind_params(g, spec, params, true);
    const NodeId loss = g.cross_entropy(logits_node(g, spec, bound, g.constant(x)), y);
    g.backward(loss);
    const auto grad = gather_gradient(g, bound);
    const auto fd = oracle::central_difference(
        [&](const std::vector<double>& theta) {
          ModelParams p = params;
          p.assign_flat(theta);
          return cross_entropy(forward_logits(spec, p, x), y);
        },
        params.flatten());
    CHECK(oracle::relative_error(grad, fd) < 1e-6);
  }
}

TEST_CASE("prediction ties and margins") {
  const Tensor logits = Tensor::matrix({{1.0, 3.0, 3.0}, {2.0, 2.0, 2.0}, {0.0, -1.0, 5.0}});
  CHECK(predict(logits) == std::vector<int>{1, 0, 2});
  const std::vector<double> g{1.0, 3.0, 2.0};
  CHECK(margin(g, 1) == 0.0);
  CHECK(margin(g, 0) == 2.0);
  CHECK(kind_of([&] { margin(g, 3); }) == ErrorKind::index);
}

TEST_CASE("linf distance net is 1-Lipschitz") {
  const ModelSpec spec{ModelKind::linf_dist_net, {3, 8, 8, 4}};
  const ModelParams params = oracle::random_params(spec, 2);
  Rng rng(6);
  for (int t = 0; t < 500; ++t) {
    Tensor x(Shape{2, 3});
    for (double& v : x.data()) v = rng.uniform(-2, 2);
    const Tensor g = forward_logits(spec, params, x);
    double dx = 0.0, dg = 0.0;
    for (std::size_t k = 0; k < 3; ++k) dx = std::max(dx, std::abs(x.at(0, k) - x.at(1, k)));
    for (std::size_t k = 0; k < 4; ++k) dg = std::max(dg, std::abs(g.at(0, k) - g.at(1, k)));
    CHECK(dg <= dx + 1e-12);
  }
}

TEST_CASE("model file round trip and corruption") {
  const ModelSpec spec{ModelKind::linf_dist_net, {2, 3, 2}};
  const ModelParams params = oracle::random_params(spec, 5);
  const std::string bytes = encode_model(spec, params);
  const LoadedModel back = decode_model(bytes);
  CHECK(back.spec == spec);
  CHECK(back.params == params);
  CHECK(encode_model(back.spec, back.params) == bytes);
  CHECK(kind_of([&] { decode_model(bytes.substr(0, bytes.size() - 3)); }) == ErrorKind::parse);
  CHECK(kind_of([&] { decode_model(bytes + "x"); }) == ErrorKind::parse);
  CHECK(kind_of([&] { decode_model("verilab-model v2\n"); }) == ErrorKind::parse);
  std::string bad = bytes;
  bad.replace(bad.find("kind=linf_dist_net"), 18, "kind=linf_dist_nex");
  CHECK(kind_of([&] { decode_model(bad); }) == ErrorKind::parse);
  CHECK(kind_of([] { load_model("/nonexistent/dir/model.vlm"); }) == ErrorKind::io);

  const auto path = std::filesystem::temp_directory_path() / "verilab_models_test.vlm";
  save_model(path, spec, params);
  CHECK(load_model(path).params == params);
  std::filesystem::remove(path);
}
