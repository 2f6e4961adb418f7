#include "verilab/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "verilab/error.hpp"

namespace verilab {
namespace {

void require_matrix(const Tensor& t, const char* what) {
  require(t.rank() == 2, ErrorKind::dimension,
          [&] { return std::string(what) + " must be rank 2, got " + shape_string(t.shape()); });
}

double reduce(double total, std::size_t rows, Reduction reduction) {
  return reduction == Reduction::mean ? total / static_cast<double>(rows) : total;
}

}  // namespace

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_matrix(x, "affine input");
  require_matrix(w, "affine weight");
  require(b.rank() == 1, ErrorKind::dimension, "affine bias must be rank 1");
  const std::size_t n = x.rows(), d = x.cols(), m = w.cols();
  require(w.rows() == d && b.dim(0) == m, ErrorKind::dimension,
          [&] { return "affine shapes " + shape_string(x.shape()) + " x " + shape_string(w.shape()) + " + " +
              shape_string(b.shape()); });
  Tensor out(Shape{n, m});
  for (std::size_t i = 0; i < n; ++i) {
    auto o = out.row(i);
    for (std::size_t k = 0; k < d; ++k) {
      const double xik = x.at(i, k);
      const auto wk = w.row(k);
      for (std::size_t j = 0; j < m; ++j) o[j] += xik * wk[j];
    }
    for (std::size_t j = 0; j < m; ++j) o[j] += b[j];
  }
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor negate(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.data()) v = -v;
  return out;
}

Tensor log_softmax(const Tensor& logits) {
  require_matrix(logits, "log_softmax input");
  require(logits.cols() >= 2, ErrorKind::dimension, "log_softmax needs at least 2 classes");
  require(logits.all_finite(), ErrorKind::numeric, "non-finite logits");
  Tensor out(logits.shape());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto in = logits.row(i);
    const double top = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (double v : in) total += std::exp(v - top);
    const double shift = top + std::log(total);
    auto o = out.row(i);
    for (std::size_t j = 0; j < in.size(); ++j) o[j] = in[j] - shift;
  }
  return out;
}

double cross_entropy_from_log_probs(const Tensor& log_probs, std::span<const int> labels, Reduction reduction) {
  require(labels.size() == log_probs.rows(), ErrorKind::dimension, "cross_entropy label count mismatch");
  require(!labels.empty(), ErrorKind::dimension, "cross_entropy of an empty batch");
  const auto classes = static_cast<int>(log_probs.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < classes, ErrorKind::index,
            [&] { return "label " + std::to_string(labels[i]) + " outside [0," + std::to_string(classes) + ")"; });
    total -= log_probs.at(i, static_cast<std::size_t>(labels[i]));
  }
  return reduce(total, labels.size(), reduction);
}

double cross_entropy(const Tensor& logits, std::span<const int> labels, Reduction reduction) {
  return cross_entropy_from_log_probs(log_softmax(logits), labels, reduction);
}

double kl_from_log_probs(const Tensor& log_p, const Tensor& log_q, Reduction reduction) {
  require(log_p.shape() == log_q.shape(), ErrorKind::dimension,
          [&] { return "kl_divergence shapes " + shape_string(log_p.shape()) + " vs " + shape_string(log_q.shape()); });
  require(log_p.rows() > 0, ErrorKind::dimension, "kl_divergence of an empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < log_p.rows(); ++i) {
    const auto lp = log_p.row(i);
    const auto lq = log_q.row(i);
    double row = 0.0;
    for (std::size_t j = 0; j < lp.size(); ++j) row += std::exp(lp[j]) * (lp[j] - lq[j]);
    total += row;
  }
  return reduce(total, log_p.rows(), reduction);
}

double kl_divergence(const Tensor& p_logits, const Tensor& q_logits, Reduction reduction) {
  require(p_logits.shape() == q_logits.shape(), ErrorKind::dimension,
          [&] { return "kl_divergence shapes " + shape_string(p_logits.shape()) + " vs " + shape_string(q_logits.shape()); });
  return kl_from_log_probs(log_softmax(p_logits), log_softmax(q_logits), reduction);
}

double linf_unit(std::span<const double> x, std::span<const double> w, double b) {
  require(x.size() == w.size(), ErrorKind::dimension, "linf_unit size mismatch");
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) best = std::max(best, std::abs(x[k] - w[k]));
  return best + b;
}

Tensor linf_layer(const Tensor& x, const Tensor& w, const Tensor& b, std::vector<std::uint32_t>* argmax,
                  std::vector<std::int8_t>* sign) {
  require_matrix(x, "linf layer input");
  require_matrix(w, "linf layer weight");
  require(b.rank() == 1, ErrorKind::dimension, "linf layer bias must be rank 1");
  const std::size_t n = x.rows(), d = x.cols(), units = w.rows();
  require(w.cols() == d && b.dim(0) == units && d > 0, ErrorKind::dimension,
          [&] { return "linf layer shapes " + shape_string(x.shape()) + " vs " + shape_string(w.shape()); });
  Tensor out(Shape{n, units});
  if (argmax) argmax->assign(n * units, 0);
  if (sign) sign->assign(n * units, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x.row(i);
    for (std::size_t u = 0; u < units; ++u) {
      const auto wu = w.row(u);
      std::size_t best_k = 0;
      double best = std::abs(xi[0] - wu[0]);
      for (std::size_t k = 1; k < d; ++k) {
        const double dist = std::abs(xi[k] - wu[k]);
        if (dist > best) {
          best = dist;
          best_k = k;
        }
      }
      out.at(i, u) = best + b[u];
      if (argmax) (*argmax)[i * units + u] = static_cast<std::uint32_t>(best_k);
      if (sign) (*sign)[i * units + u] = xi[best_k] - wu[best_k] >= 0.0 ? 1 : -1;
    }
  }
  return out;
}

}  // namespace verilab
