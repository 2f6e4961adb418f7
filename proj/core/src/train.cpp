#include "verilab/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "verilab/autodiff.hpp"
#include "verilab/error.hpp"
#include "verilab/ops.hpp"
#include "verilab/report_format.hpp"
#include "verilab/rng.hpp"

namespace verilab {

std::string to_string(TrainMethod method) {
  switch (method) {
    case TrainMethod::standard: return "standard";
    case TrainMethod::pgd_at: return "pgd_at";
    case TrainMethod::trades: return "trades";
    case TrainMethod::thrm: return "thrm";
  }
  return "unknown";
}

TrainMethod parse_train_method(const std::string& text) {
  if (text == "standard") return TrainMethod::standard;
  if (text == "pgd_at") return TrainMethod::pgd_at;
  if (text == "trades") return TrainMethod::trades;
  if (text == "thrm") return TrainMethod::thrm;
  fail(ErrorKind::config, "unknown training method '" + text + "' (expected standard, pgd_at, trades or thrm)");
}

Objective inner_objective(TrainMethod method) {
  switch (method) {
    case TrainMethod::pgd_at: return Objective::adversarial_untargeted;
    case TrainMethod::trades: return Objective::stability;
    case TrainMethod::thrm: return Objective::hypocritical;
    case TrainMethod::standard: break;
  }
  fail(ErrorKind::contract, "standard training has no inner attack");
}

namespace {

bool uses_inner(TrainMethod method, double lambda) {
  switch (method) {
    case TrainMethod::standard: return false;
    case TrainMethod::pgd_at: return true;
    case TrainMethod::trades:
    case TrainMethod::thrm: return lambda != 0.0;
  }
  return false;
}

}  // namespace

void TrainConfig::validate() const {
  require(epochs >= 0, ErrorKind::config, "epochs must be >= 0");
  require(batch_size >= 1, ErrorKind::config, "batch_size must be >= 1");
  require(std::isfinite(lr) && lr > 0.0, ErrorKind::config, "lr must be > 0");
  require(std::isfinite(momentum) && momentum >= 0.0, ErrorKind::config, "momentum must be >= 0");
  require(std::isfinite(weight_decay) && weight_decay >= 0.0, ErrorKind::config, "weight_decay must be >= 0");
  require(std::isfinite(lr_decay_factor) && lr_decay_factor > 0.0, ErrorKind::config, "lr_decay_factor must be > 0");
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorKind::config, "lambda must be >= 0");
  require(monitor_every >= 0, ErrorKind::config, "monitor_every must be >= 0");
  if (method != TrainMethod::standard)
    require(attack.has_value(), ErrorKind::config, [&] { return to_string(method) + " training needs an attack section"; });
  if (attack) {
    attack->threat.validate();
    attack->attack.validate(attack->threat);
  }
}

double TrainConfig::lr_at(int epoch) const {
  double out = lr;
  for (int e : lr_decay_epochs)
    if (e <= epoch) out *= lr_decay_factor;
  return out;
}

BatchLoss batch_loss(const ModelSpec& spec, const ModelParams& params, TrainMethod method, double lambda,
                     const Tensor& x, std::span<const int> y, const Tensor& inner) {
  require(x.rank() == 2 && x.rows() == y.size() && x.rows() > 0, ErrorKind::dimension, "batch shape mismatch");
  const bool needs_inner = uses_inner(method, lambda);
  if (needs_inner) require(inner.shape() == x.shape(), ErrorKind::dimension, "inner points do not match batch");

  Graph graph;
  const BoundModel model = bind_params(graph, spec, params, true);
  const std::vector<int> labels(y.begin(), y.end());
  NodeId loss;
  if (method == TrainMethod::pgd_at) {
    const NodeId logits = logits_node(graph, spec, model, graph.constant(inner));
    loss = graph.cross_entropy(logits, labels);
  } else {
    const NodeId clean = logits_node(graph, spec, model, graph.constant(x));
    loss = graph.cross_entropy(clean, labels);
    if (needs_inner) {
      const NodeId perturbed = logits_node(graph, spec, model, graph.constant(inner));
      loss = graph.add(loss, graph.scale(graph.kl_divergence(clean, perturbed), lambda));
    }
  }
  graph.backward(loss);
  return {graph.value(loss).item(), gather_gradient(graph, model)};
}

Tensor inner_points(const ModelSpec& spec, const ModelParams& params, const TrainConfig& cfg, const Tensor& x,
                    std::span<const int> y, std::span<const std::uint64_t> streams, int epoch) {
  if (!uses_inner(cfg.method, cfg.lambda)) return x;
  require(cfg.attack.has_value(), ErrorKind::config, [&] { return to_string(cfg.method) + " training needs an attack section"; });
  AttackConfig attack = cfg.attack->attack;
  attack.objective = inner_objective(cfg.method);
  attack.seed = stream_seed(cfg.attack->attack.seed, {0x7a11u, static_cast<std::uint64_t>(epoch)});
  const auto results = parallel_pgd_rows(spec, params, x, y, {}, streams, cfg.attack->threat, attack, cfg.workers);
  return attack_points(results, x.cols());
}

std::string format_metrics_line(const EpochMetrics& m) {
  const auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("undefined"); };
  std::string line = "epoch=" + std::to_string(m.epoch) + " lr=" + format_number(m.lr) +
                     " loss=" + format_number(m.mean_loss) + " train_acc=" + format_number(m.train_accuracy);
  if (m.adv_accuracy || m.hyp_accuracy) line += " adv_acc=" + opt(m.adv_accuracy) + " hyp_acc=" + opt(m.hyp_accuracy);
  return line;
}

namespace {

double accuracy(const ModelSpec& spec, const ModelParams& params, const Dataset& data) {
  const std::vector<int> pred = predict(forward_logits(spec, params, data.inputs));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == data.labels[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

void monitor(const ModelSpec& spec, const ModelParams& params, const Dataset& data, const TrainConfig& cfg,
             EpochMetrics& m) {
  const std::size_t count = std::min(cfg.monitor_samples, data.size());
  if (count == 0) return;
  std::vector<std::size_t> rows(count);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const Dataset sample = select(data, rows);
  const ThreatModel& threat = cfg.attack->threat;
  AttackSuite suite = AttackSuite::evaluation(threat.eps, stream_seed(cfg.seed, {0x3017u}));
  suite.hypocritical.steps = suite.adversarial.steps = suite.stability.steps = 5;
  const RiskReport r = estimate_risks(build_ledger(spec, params, sample, threat, suite, cfg.workers));
  m.adv_accuracy = 1.0 - *r.adv_D.value();
  m.hyp_accuracy = *r.hyp_D.value();
}

}  // namespace

TrainResult train(const ModelSpec& spec, const ModelParams& init, const Dataset& data, const TrainConfig& cfg) {
  spec.validate();
  init.check_against(spec);
  data.validate();
  cfg.validate();
  require(!data.empty(), ErrorKind::contract, "cannot train on an empty dataset");
  require(data.dim() == spec.widths.front(), ErrorKind::dimension, "dataset dimension does not match model input");
  require(static_cast<std::size_t>(data.num_classes) == spec.widths.back(), ErrorKind::dimension,
          "dataset class count does not match model output");

  TrainResult result{init, {}};
  std::vector<double> theta = init.flatten();
  std::vector<double> velocity(theta.size(), 0.0);
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = cfg.lr_at(epoch);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(stream_seed(cfg.seed, {0x5eedu, static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      const std::span<const std::size_t> rows(order.data() + begin, end - begin);
      const Tensor x = gather_rows(data.inputs, rows);
      std::vector<int> y(rows.size());
      std::vector<std::uint64_t> streams(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        y[i] = data.labels[rows[i]];
        streams[i] = rows[i];
      }
      result.params.assign_flat(theta);
      const Tensor inner = inner_points(spec, result.params, cfg, x, y, streams, epoch);
      const BatchLoss bl = batch_loss(spec, result.params, cfg.method, cfg.lambda, x, y, inner);
      if (!std::isfinite(bl.loss))
        fail(ErrorKind::numeric, "non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(batch_index));
      loss_sum += bl.loss * static_cast<double>(rows.size());
      for (std::size_t k = 0; k < theta.size(); ++k) {
        const double g = bl.gradient[k] + cfg.weight_decay * theta[k];
        velocity[k] = cfg.momentum * velocity[k] + g;
        theta[k] -= lr * velocity[k];
      }
    }
    result.params.assign_flat(theta);
    EpochMetrics m;
    m.epoch = epoch;
    m.lr = lr;
    m.mean_loss = loss_sum / static_cast<double>(n);
    m.train_accuracy = accuracy(spec, result.params, data);
    if (cfg.monitor_every > 0 && epoch % cfg.monitor_every == 0 && cfg.attack) monitor(spec, result.params, data, cfg, m);
    result.metrics.push_back(m);
  }
  result.params.assign_flat(theta);
  return result;
}

std::vector<SweepEntry> lambda_sweep(const ModelSpec& spec, const ModelParams& init, const Dataset& train_data,
                                     const Dataset& heldout, const TrainConfig& base,
                                     std::span<const double> lambdas, const ThreatModel& eval_threat,
                                     const AttackSuite& suite, std::size_t workers) {
  require(!lambdas.empty(), ErrorKind::config, "lambda sweep needs at least one lambda");
  std::vector<SweepEntry> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    TrainConfig cfg = base;
    cfg.lambda = lambda;
    TrainResult trained = train(spec, init, train_data, cfg);
    RiskReport report = estimate_risks(build_ledger(spec, trained.params, heldout, eval_threat, suite, workers));
    out.push_back({lambda, std::move(trained.params), std::move(report)});
  }
  return out;
}

}  // namespace verilab
