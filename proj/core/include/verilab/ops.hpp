#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "verilab/tensor.hpp"

namespace verilab {

/// How per-row losses are combined. Attacks use `sum` so each row's gradient
/// is independent of how many rows share a batch.
enum class Reduction { mean, sum };

// Forward-only kernels. The autodiff graph calls exactly these, so a value
// computed with or without a graph is bit-identical.

/// out[i,j] = sum_k x[i,k] * w[k,j] + b[j]; x is [n,d], w is [d,m], b is [m].
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor relu(const Tensor& x);
Tensor negate(const Tensor& x);

/// Row-wise log-softmax of [n,M] logits using max subtraction. Throws a
/// numeric error on non-finite input.
Tensor log_softmax(const Tensor& logits);

double cross_entropy(const Tensor& logits, std::span<const int> labels, Reduction reduction = Reduction::mean);
double cross_entropy_from_log_probs(const Tensor& log_probs, std::span<const int> labels, Reduction reduction);

/// sum_j p_j (log p_j - log q_j) per row, with p and q the softmax of each argument.
double kl_divergence(const Tensor& p_logits, const Tensor& q_logits, Reduction reduction = Reduction::mean);
double kl_from_log_probs(const Tensor& log_p, const Tensor& log_q, Reduction reduction);

/// max_k |x_k - w_k| + b.
double linf_unit(std::span<const double> x, std::span<const double> w, double b);

/// One layer of l-infinity distance units: out[i,u] = max_k |x[i,k] - w[u,k]| + b[u].
/// x is [n,d], w is [units,d], b is [units]. When `argmax`/`sign` are given they
/// receive, per output entry, the first maximizing coordinate and the sign of
/// (x - w) there (+1 at exact zero).
Tensor linf_layer(const Tensor& x, const Tensor& w, const Tensor& b,
                  std::vector<std::uint32_t>* argmax = nullptr, std::vector<std::int8_t>* sign = nullptr);

}  // namespace verilab
