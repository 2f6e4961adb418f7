#include "verilab/autodiff.hpp"

#include <cmath>

#include "verilab/error.hpp"

namespace verilab {

NodeId Graph::push(Node node) {
  has_gradients_ = false;
  nodes_.push_back(std::move(node));
  return NodeId{nodes_.size() - 1};
}

const Graph::Node& Graph::node(NodeId id) const {
  require(id.index < nodes_.size(), ErrorKind::index, "unknown graph node");
  return nodes_[id.index];
}

NodeId Graph::input(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  return push(std::move(n));
}

NodeId Graph::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Graph::affine(NodeId x, NodeId w, NodeId b) {
  Node n;
  n.op = Op::affine;
  n.in[0] = x.index;
  n.in[1] = w.index;
  n.in[2] = b.index;
  n.value = verilab::affine(node(x).value, node(w).value, node(b).value);
  n.needs_grad = node(x).needs_grad || node(w).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

NodeId Graph::relu(NodeId x) {
  Node n;
  n.op = Op::relu;
  n.in[0] = x.index;
  n.value = verilab::relu(node(x).value);
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

NodeId Graph::negate(NodeId x) {
  Node n;
  n.op = Op::negate;
  n.in[0] = x.index;
  n.value = verilab::negate(node(x).value);
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

NodeId Graph::log_softmax(NodeId logits) {
  Node n;
  n.op = Op::log_softmax;
  n.in[0] = logits.index;
  n.value = verilab::log_softmax(node(logits).value);
  n.needs_grad = node(logits).needs_grad;
  return push(std::move(n));
}

NodeId Graph::cross_entropy(NodeId logits, std::vector<int> labels, Reduction reduction) {
  Node n;
  n.op = Op::cross_entropy;
  n.in[0] = logits.index;
  n.cache_a = verilab::log_softmax(node(logits).value);
  n.value = Tensor::scalar(cross_entropy_from_log_probs(n.cache_a, labels, reduction));
  n.labels = std::move(labels);
  n.reduction = reduction;
  n.needs_grad = node(logits).needs_grad;
  return push(std::move(n));
}

NodeId Graph::kl_divergence(NodeId p_logits, NodeId q_logits, Reduction reduction) {
  const Tensor& p = node(p_logits).value;
  const Tensor& q = node(q_logits).value;
  require(p.shape() == q.shape(), ErrorKind::dimension,
          [&] { return "kl_divergence shapes " + shape_string(p.shape()) + " vs " + shape_string(q.shape()); });
  Node n;
  n.op = Op::kl_divergence;
  n.in[0] = p_logits.index;
  n.in[1] = q_logits.index;
  n.cache_a = verilab::log_softmax(p);
  n.cache_b = verilab::log_softmax(q);
  n.value = Tensor::scalar(kl_from_log_probs(n.cache_a, n.cache_b, reduction));
  n.reduction = reduction;
  n.needs_grad = node(p_logits).needs_grad || node(q_logits).needs_grad;
  return push(std::move(n));
}

NodeId Graph::linf_layer(NodeId x, NodeId w, NodeId b) {
  Node n;
  n.op = Op::linf_layer;
  n.in[0] = x.index;
  n.in[1] = w.index;
  n.in[2] = b.index;
  n.value = verilab::linf_layer(node(x).value, node(w).value, node(b).value, &n.argmax, &n.sign);
  n.needs_grad = node(x).needs_grad || node(w).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) {
  const Tensor& va = node(a).value;
  const Tensor& vb = node(b).value;
  require(va.shape() == vb.shape(), ErrorKind::dimension,
          [&] { return "add shapes " + shape_string(va.shape()) + " vs " + shape_string(vb.shape()); });
  Node n;
  n.op = Op::add;
  n.in[0] = a.index;
  n.in[1] = b.index;
  n.value = va;
  for (std::size_t i = 0; i < vb.size(); ++i) n.value[i] += vb[i];
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

NodeId Graph::scale(NodeId a, double factor) {
  Node n;
  n.op = Op::scale;
  n.in[0] = a.index;
  n.value = node(a).value;
  for (double& v : n.value.data()) v *= factor;
  n.factor = factor;
  n.needs_grad = node(a).needs_grad;
  return push(std::move(n));
}

const Tensor& Graph::value(NodeId id) const { return node(id).value; }

const Tensor& Graph::grad(NodeId id) const {
  require(has_gradients_, ErrorKind::contract, "grad() requested before backward()");
  return node(id).grad;
}

void Graph::accumulate(std::size_t target, const Tensor& delta) {
  Node& t = nodes_[target];
  if (!t.needs_grad) return;
  for (std::size_t i = 0; i < delta.size(); ++i) t.grad[i] += delta[i];
}

void Graph::backward(NodeId loss) {
  const Node& root = node(loss);
  require(root.value.size() == 1, ErrorKind::contract,
          [&] { return "backward() needs a scalar loss, got shape " + shape_string(root.value.shape()); });
  for (Node& n : nodes_) n.grad = Tensor(n.value.shape());
  nodes_[loss.index].grad[0] = 1.0;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    if (nodes_[i].needs_grad && nodes_[i].op != Op::leaf) backward_node(i);
  }
  has_gradients_ = true;
}

void Graph::backward_node(std::size_t index) {
  const Node& n = nodes_[index];
  const Tensor& g = n.grad;
  switch (n.op) {
    case Op::leaf:
      return;
    case Op::affine: {
      const Tensor& x = nodes_[n.in[0]].value;
      const Tensor& w = nodes_[n.in[1]].value;
      const std::size_t rows = x.rows(), d = x.cols(), m = w.cols();
      if (nodes_[n.in[0]].needs_grad) {
        Tensor dx(x.shape());
        for (std::size_t i = 0; i < rows; ++i) {
          const auto gi = g.row(i);
          for (std::size_t k = 0; k < d; ++k) {
            const auto wk = w.row(k);
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += gi[j] * wk[j];
            dx.at(i, k) = s;
          }
        }
        accumulate(n.in[0], dx);
      }
      if (nodes_[n.in[1]].needs_grad) {
        Tensor dw(w.shape());
        for (std::size_t i = 0; i < rows; ++i) {
          const auto gi = g.row(i);
          for (std::size_t k = 0; k < d; ++k) {
            const double xik = x.at(i, k);
            auto dwk = dw.row(k);
            for (std::size_t j = 0; j < m; ++j) dwk[j] += xik * gi[j];
          }
        }
        accumulate(n.in[1], dw);
      }
      if (nodes_[n.in[2]].needs_grad) {
        Tensor db(Shape{m});
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t j = 0; j < m; ++j) db[j] += g.at(i, j);
        accumulate(n.in[2], db);
      }
      return;
    }
    case Op::relu: {
      const Tensor& x = nodes_[n.in[0]].value;
      Tensor dx(x.shape());
      for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? g[i] : 0.0;
      accumulate(n.in[0], dx);
      return;
    }
    case Op::negate: {
      Tensor dx = g;
      for (double& v : dx.data()) v = -v;
      accumulate(n.in[0], dx);
      return;
    }
    case Op::log_softmax: {
      // d/dx_k = g_k - softmax_k * sum_j g_j
      const Tensor& out = n.value;
      Tensor dx(out.shape());
      for (std::size_t i = 0; i < out.rows(); ++i) {
        double total = 0.0;
        for (double v : g.row(i)) total += v;
        for (std::size_t k = 0; k < out.cols(); ++k) dx.at(i, k) = g.at(i, k) - std::exp(out.at(i, k)) * total;
      }
      accumulate(n.in[0], dx);
      return;
    }
    case Op::cross_entropy: {
      const Tensor& log_probs = n.cache_a;
      const std::size_t rows = log_probs.rows();
      const double w = g[0] * (n.reduction == Reduction::mean ? 1.0 / static_cast<double>(rows) : 1.0);
      Tensor dx(log_probs.shape());
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < log_probs.cols(); ++k) dx.at(i, k) = w * std::exp(log_probs.at(i, k));
        dx.at(i, static_cast<std::size_t>(n.labels[i])) -= w;
      }
      accumulate(n.in[0], dx);
      return;
    }
    case Op::kl_divergence: {
      const Tensor& lp = n.cache_a;
      const Tensor& lq = n.cache_b;
      const std::size_t rows = lp.rows(), cols = lp.cols();
      const double w = g[0] * (n.reduction == Reduction::mean ? 1.0 / static_cast<double>(rows) : 1.0);
      if (nodes_[n.in[0]].needs_grad) {
        // d/da_k = p_k * ((log p_k - log q_k) - KL_row)
        Tensor da(lp.shape());
        for (std::size_t i = 0; i < rows; ++i) {
          double row_kl = 0.0;
          for (std::size_t j = 0; j < cols; ++j) row_kl += std::exp(lp.at(i, j)) * (lp.at(i, j) - lq.at(i, j));
          for (std::size_t k = 0; k < cols; ++k)
            da.at(i, k) = w * std::exp(lp.at(i, k)) * ((lp.at(i, k) - lq.at(i, k)) - row_kl);
        }
        accumulate(n.in[0], da);
      }
      if (nodes_[n.in[1]].needs_grad) {
        // d/db_k = q_k - p_k
        Tensor db(lq.shape());
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t k = 0; k < cols; ++k) db.at(i, k) = w * (std::exp(lq.at(i, k)) - std::exp(lp.at(i, k)));
        accumulate(n.in[1], db);
      }
      return;
    }
    case Op::linf_layer: {
      const Tensor& x = nodes_[n.in[0]].value;
      const Tensor& w = nodes_[n.in[1]].value;
      const std::size_t rows = x.rows(), units = w.rows();
      Tensor dx(x.shape());
      Tensor dw(w.shape());
      Tensor db(Shape{units});
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t u = 0; u < units; ++u) {
          const std::size_t at = i * units + u;
          const double gu = g[at];
          const std::size_t k = n.argmax[at];
          const double s = n.sign[at];
          dx.at(i, k) += s * gu;
          dw.at(u, k) -= s * gu;
          db[u] += gu;
        }
      }
      accumulate(n.in[0], dx);
      accumulate(n.in[1], dw);
      accumulate(n.in[2], db);
      return;
    }
    case Op::add:
      accumulate(n.in[0], g);
      accumulate(n.in[1], g);
      return;
    case Op::scale: {
      Tensor dx = g;
      for (double& v : dx.data()) v *= n.factor;
      accumulate(n.in[0], dx);
      return;
    }
  }
}

}  // namespace verilab
