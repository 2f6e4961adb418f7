#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "verilab/tensor.hpp"

namespace verilab {

/// Valid input range. Infinite bounds mean the data is unclamped.
struct ClampRange {
  double lo = 0.0;
  double hi = 1.0;

  static ClampRange unclamped() {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  [[nodiscard]] bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  [[nodiscard]] double apply(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
  friend bool operator==(const ClampRange&, const ClampRange&) = default;
};

/// Labeled examples: inputs is [n, d] and labels[i] is in [0, num_classes).
struct Dataset {
  Tensor inputs;
  std::vector<int> labels;
  int num_classes = 2;
  ClampRange clamp;

  [[nodiscard]] std::size_t size() const { return labels.size(); }
  [[nodiscard]] std::size_t dim() const { return inputs.rank() == 2 ? inputs.cols() : 0; }
  [[nodiscard]] bool empty() const { return labels.empty(); }

  /// Throws unless the shapes, labels, and feature values are consistent.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Subset of rows, in the given order.
Dataset select(const Dataset& data, const std::vector<std::size_t>& indices);

}  // namespace verilab
