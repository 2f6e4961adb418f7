#include "verilab/models.hpp"

#include <algorithm>
#include <cmath>

#include "verilab/error.hpp"
#include "verilab/ops.hpp"
#include "verilab/rng.hpp"

namespace verilab {

std::string to_string(ModelKind kind) { return kind == ModelKind::mlp ? "mlp" : "linf_dist_net"; }

ModelKind parse_model_kind(const std::string& text) {
  if (text == "mlp") return ModelKind::mlp;
  if (text == "linf_dist_net") return ModelKind::linf_dist_net;
  fail(ErrorKind::config, "unknown model kind '" + text + "'");
}

void ModelSpec::validate() const {
  require(widths.size() >= 2, ErrorKind::config, "model needs at least input and output widths");
  require(std::all_of(widths.begin(), widths.end(), [](std::size_t w) { return w > 0; }), ErrorKind::config,
          "model widths must be positive");
  require(num_classes() >= 2, ErrorKind::config, "model needs at least 2 classes");
  if (kind == ModelKind::mlp)
    require(widths.size() >= 3, ErrorKind::config, "mlp needs at least one hidden layer");
}

namespace {

Shape weight_shape(const ModelSpec& spec, std::size_t layer) {
  const std::size_t in = spec.widths[layer], out = spec.widths[layer + 1];
  return spec.kind == ModelKind::mlp ? Shape{in, out} : Shape{out, in};
}

}  // namespace

ModelParams::ModelParams(std::vector<LayerParams> layers) : layers_(std::move(layers)) {}

ModelParams ModelParams::zeros(const ModelSpec& spec) {
  spec.validate();
  std::vector<LayerParams> layers;
  for (std::size_t l = 0; l < spec.num_layers(); ++l)
    layers.push_back({Tensor(weight_shape(spec, l)), Tensor(Shape{spec.widths[l + 1]})});
  return ModelParams(std::move(layers));
}

std::size_t ModelParams::count() const {
  std::size_t total = 0;
  for (const auto& l : layers_) total += l.weight.size() + l.bias.size();
  return total;
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(count());
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.weight.data().begin(), l.weight.data().end());
    flat.insert(flat.end(), l.bias.data().begin(), l.bias.data().end());
  }
  return flat;
}

void ModelParams::assign_flat(std::span<const double> flat) {
  require(flat.size() == count(), ErrorKind::dimension,
          [&] { return "flat parameter vector has " + std::to_string(flat.size()) + " values, expected " +
              std::to_string(count()); });
  std::size_t at = 0;
  for (auto& l : layers_) {
    for (double& v : l.weight.data()) v = flat[at++];
    for (double& v : l.bias.data()) v = flat[at++];
  }
}

void ModelParams::check_against(const ModelSpec& spec) const {
  spec.validate();
  require(layers_.size() == spec.num_layers(), ErrorKind::dimension, "parameter layer count does not match spec");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    require(layers_[l].weight.shape() == weight_shape(spec, l) &&
                layers_[l].bias.shape() == Shape{spec.widths[l + 1]},
            ErrorKind::dimension, [&] { return "parameter shapes of layer " + std::to_string(l) + " do not match spec"; });
    require(layers_[l].weight.all_finite() && layers_[l].bias.all_finite(), ErrorKind::numeric,
            [&] { return "non-finite parameters in layer " + std::to_string(l); });
  }
}

std::size_t parameter_count(const ModelSpec& spec) {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l)
    total += spec.widths[l] * spec.widths[l + 1] + spec.widths[l + 1];
  return total;
}

Tensor forward_logits(const ModelSpec& spec, const ModelParams& params, const Tensor& inputs) {
  require(inputs.rank() == 2 && inputs.cols() == spec.input_dim(), ErrorKind::dimension,
          [&] { return "input batch " + shape_string(inputs.shape()) + " does not match model input width " +
              std::to_string(spec.input_dim()); });
  const auto& layers = params.layers();
  require(layers.size() == spec.num_layers(), ErrorKind::dimension, "parameters do not match spec");
  Tensor h = inputs;
  if (spec.kind == ModelKind::mlp) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      h = affine(h, layers[l].weight, layers[l].bias);
      if (l + 1 < layers.size()) h = relu(h);
    }
    return h;
  }
  for (const auto& layer : layers) h = linf_layer(h, layer.weight, layer.bias);
  return negate(h);
}

BoundModel bind_params(Graph& graph, const ModelSpec& spec, const ModelParams& params, bool trainable) {
  require(params.layers().size() == spec.num_layers(), ErrorKind::dimension, "parameters do not match spec");
  BoundModel bound;
  for (const auto& layer : params.layers()) {
    bound.weights.push_back(trainable ? graph.input(layer.weight) : graph.constant(layer.weight));
    bound.biases.push_back(trainable ? graph.input(layer.bias) : graph.constant(layer.bias));
  }
  return bound;
}

NodeId logits_node(Graph& graph, const ModelSpec& spec, const BoundModel& model, NodeId inputs) {
  const Tensor& x = graph.value(inputs);
  require(x.rank() == 2 && x.cols() == spec.input_dim(), ErrorKind::dimension,
          [&] { return "input batch " + shape_string(x.shape()) + " does not match model input width " +
              std::to_string(spec.input_dim()); });
  NodeId h = inputs;
  const std::size_t layers = model.weights.size();
  if (spec.kind == ModelKind::mlp) {
    for (std::size_t l = 0; l < layers; ++l) {
      h = graph.affine(h, model.weights[l], model.biases[l]);
      if (l + 1 < layers) h = graph.relu(h);
    }
    return h;
  }
  for (std::size_t l = 0; l < layers; ++l) h = graph.linf_layer(h, model.weights[l], model.biases[l]);
  return graph.negate(h);
}

std::vector<double> gather_gradient(const Graph& graph, const BoundModel& model) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    const auto gw = graph.grad(model.weights[l]).data();
    const auto gb = graph.grad(model.biases[l]).data();
    flat.insert(flat.end(), gw.begin(), gw.end());
    flat.insert(flat.end(), gb.begin(), gb.end());
  }
  return flat;
}

int predict_row(std::span<const double> logits) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < logits.size(); ++j)
    if (logits[j] > logits[best]) best = j;
  return static_cast<int>(best);
}

std::vector<int> predict(const Tensor& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) out[i] = predict_row(logits.row(i));
  return out;
}

double margin(std::span<const double> g, int y) {
  require(y >= 0 && static_cast<std::size_t>(y) < g.size(), ErrorKind::index,
          [&] { return "class " + std::to_string(y) + " outside [0," + std::to_string(g.size()) + ")"; });
  return *std::max_element(g.begin(), g.end()) - g[static_cast<std::size_t>(y)];
}

ModelParams init_params(const ModelSpec& spec, std::uint64_t seed, InitRange range) {
  ModelParams params = ModelParams::zeros(spec);
  require(range.lo <= range.hi && std::isfinite(range.lo) && std::isfinite(range.hi), ErrorKind::config,
          "invalid init range");
  Rng rng(stream_seed(seed, {0x1a17}));
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    Tensor& w = params.layers()[l].weight;
    if (spec.kind == ModelKind::mlp) {
      const double scale = std::sqrt(2.0 / static_cast<double>(spec.widths[l]));
      for (double& v : w.data()) v = scale * rng.normal();
    } else {
      for (double& v : w.data()) v = rng.uniform(range.lo, range.hi);
    }
  }
  return params;
}

}  // namespace verilab
