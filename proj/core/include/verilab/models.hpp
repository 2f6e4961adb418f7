#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "verilab/autodiff.hpp"
#include "verilab/tensor.hpp"

namespace verilab {

enum class ModelKind { mlp, linf_dist_net };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

/// Architecture: layer widths from input dimension through hidden layers to the
/// number of classes.
struct ModelSpec {
  ModelKind kind = ModelKind::mlp;
  std::vector<std::size_t> widths;

  [[nodiscard]] std::size_t input_dim() const { return widths.front(); }
  [[nodiscard]] std::size_t num_classes() const { return widths.back(); }
  [[nodiscard]] std::size_t num_layers() const { return widths.size() - 1; }

  /// Throws a config error unless the widths describe a usable model.
  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct LayerParams {
  Tensor weight;  // mlp: [in, out]; linf_dist_net: [units, in]
  Tensor bias;    // [out]
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// Parameters stored per layer; flatten() gives the canonical flat vector
/// (layer by layer, weight then bias, row-major) used by optimizers and the
/// model file format.
class ModelParams {
 public:
  ModelParams() = default;
  explicit ModelParams(std::vector<LayerParams> layers);

  /// Zero-valued parameters laid out for `spec`.
  static ModelParams zeros(const ModelSpec& spec);

  [[nodiscard]] const std::vector<LayerParams>& layers() const noexcept { return layers_; }
  [[nodiscard]] std::vector<LayerParams>& layers() noexcept { return layers_; }

  [[nodiscard]] std::size_t count() const;
  [[nodiscard]] std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);
  /// Throws unless the layout matches `spec` and every value is finite.
  void check_against(const ModelSpec& spec) const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  std::vector<LayerParams> layers_;
};

std::size_t parameter_count(const ModelSpec& spec);

/// Logits (for an l-infinity distance net, the negated last-layer outputs g(x))
/// of an [n, d] batch.
Tensor forward_logits(const ModelSpec& spec, const ModelParams& params, const Tensor& inputs);

/// Parameter leaves of a model inside a graph.
struct BoundModel {
  std::vector<NodeId> weights;
  std::vector<NodeId> biases;
};

/// Adds the parameters to `graph`, as differentiable inputs when `trainable`.
BoundModel bind_params(Graph& graph, const ModelSpec& spec, const ModelParams& params, bool trainable);

/// Graph counterpart of forward_logits; values are bit-identical.
NodeId logits_node(Graph& graph, const ModelSpec& spec, const BoundModel& model, NodeId inputs);

/// Flat gradient (same layout as ModelParams::flatten) after graph.backward().
std::vector<double> gather_gradient(const Graph& graph, const BoundModel& model);

/// Row-wise argmax; ties go to the lowest index.
std::vector<int> predict(const Tensor& logits);
int predict_row(std::span<const double> logits);

/// max_i g_i - g_y, which is non-negative and zero iff y attains the maximum.
double margin(std::span<const double> g, int y);

/// Range used to draw l-infinity distance net weights.
struct InitRange {
  double lo = 0.0;
  double hi = 1.0;
};

/// Deterministic initialization. mlp: He-normal weights (std sqrt(2/fan_in)),
/// zero biases. linf_dist_net: weights uniform over `range`, zero biases.
ModelParams init_params(const ModelSpec& spec, std::uint64_t seed, InitRange range = {});

// Model file: "verilab-model v1\n", a descriptor line
// "kind=<mlp|linf_dist_net> widths=<w0,w1,...> params=<count>\n", then the flat
// parameters as little-endian IEEE-754 doubles.
void save_model(const std::filesystem::path& path, const ModelSpec& spec, const ModelParams& params);
struct LoadedModel {
  ModelSpec spec;
  ModelParams params;
};
LoadedModel load_model(const std::filesystem::path& path);

std::string encode_model(const ModelSpec& spec, const ModelParams& params);
LoadedModel decode_model(const std::string& bytes);

}  // namespace verilab
