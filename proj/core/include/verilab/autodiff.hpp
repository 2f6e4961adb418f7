#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "verilab/ops.hpp"
#include "verilab/tensor.hpp"

namespace verilab {

struct NodeId {
  std::size_t index = 0;
  friend bool operator==(NodeId, NodeId) = default;
};

/// Tape-based reverse-mode differentiation. Nodes are appended in evaluation
/// order, so the tape itself is a topological order and backward() simply
/// walks it in reverse.
///
/// A graph is single-use scratch space: build it per forward pass, call
/// backward() once, read the gradients. Instances are not thread-safe, but
/// independent graphs can be used concurrently.
class Graph {
 public:
  /// Leaf that receives a gradient.
  NodeId input(Tensor value);
  /// Leaf excluded from differentiation.
  NodeId constant(Tensor value);

  NodeId affine(NodeId x, NodeId w, NodeId b);
  NodeId relu(NodeId x);
  NodeId negate(NodeId x);
  NodeId log_softmax(NodeId logits);
  NodeId cross_entropy(NodeId logits, std::vector<int> labels, Reduction reduction = Reduction::mean);
  NodeId kl_divergence(NodeId p_logits, NodeId q_logits, Reduction reduction = Reduction::mean);
  NodeId linf_layer(NodeId x, NodeId w, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);

  [[nodiscard]] const Tensor& value(NodeId node) const;

  /// Populates adjoints for every node upstream of `loss`, which must hold a
  /// single value.
  void backward(NodeId loss);

  /// Gradient of the last backward() loss with respect to `node`. Nodes that do
  /// not influence the loss report zeros.
  [[nodiscard]] const Tensor& grad(NodeId node) const;

  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }

 private:
  enum class Op { leaf, affine, relu, negate, log_softmax, cross_entropy, kl_divergence, linf_layer, add, scale };

  struct Node {
    Op op = Op::leaf;
    std::size_t in[3] = {0, 0, 0};
    bool needs_grad = false;
    Tensor value;
    Tensor grad;
    // op-specific data for the backward pass
    Tensor cache_a;
    Tensor cache_b;
    std::vector<int> labels;
    std::vector<std::uint32_t> argmax;
    std::vector<std::int8_t> sign;
    double factor = 1.0;
    Reduction reduction = Reduction::mean;
  };

  NodeId push(Node node);
  const Node& node(NodeId id) const;
  void accumulate(std::size_t target, const Tensor& delta);
  void backward_node(std::size_t index);

  std::vector<Node> nodes_;
  bool has_gradients_ = false;
};

}  // namespace verilab
