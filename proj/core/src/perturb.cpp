#include "verilab/perturb.hpp"

#include <algorithm>
#include <cmath>

#include "verilab/autodiff.hpp"
#include "verilab/error.hpp"
#include "verilab/ops.hpp"
#include "verilab/parallel.hpp"
#include "verilab/rng.hpp"

namespace verilab {

std::string to_string(Norm norm) { return norm == Norm::linf ? "linf" : "l2"; }

Norm parse_norm(const std::string& text) {
  if (text == "linf") return Norm::linf;
  if (text == "l2") return Norm::l2;
  fail(ErrorKind::config, "unknown norm '" + text + "'");
}

ThreatModel ThreatModel::cifar_linf() { return {Norm::linf, 8.0 / 255.0, ClampRange{0.0, 1.0}}; }
ThreatModel ThreatModel::cifar_l2() { return {Norm::l2, 0.5, ClampRange{0.0, 1.0}}; }

void ThreatModel::validate() const {
  require(std::isfinite(eps) && eps >= 0.0, ErrorKind::config, "threat radius must be finite and >= 0");
  require(clamp.lo < clamp.hi, ErrorKind::config, "clamp range needs lo < hi");
}

std::string to_string(Objective objective) {
  switch (objective) {
    case Objective::hypocritical: return "hypocritical";
    case Objective::adversarial_untargeted: return "adversarial";
    case Objective::adversarial_targeted: return "targeted";
    case Objective::stability: return "stability";
  }
  return "?";
}

Objective parse_objective(const std::string& text) {
  if (text == "hypocritical") return Objective::hypocritical;
  if (text == "adversarial") return Objective::adversarial_untargeted;
  if (text == "targeted") return Objective::adversarial_targeted;
  if (text == "stability") return Objective::stability;
  fail(ErrorKind::config, "unknown attack objective '" + text + "'");
}

bool objective_met(Objective objective, int prediction, int label, int target, int clean_prediction) {
  switch (objective) {
    case Objective::hypocritical: return prediction == label;
    case Objective::adversarial_untargeted: return prediction != label;
    case Objective::adversarial_targeted: return prediction == target;
    case Objective::stability: return prediction != clean_prediction;
  }
  return false;
}

AttackConfig AttackConfig::evaluation(Objective objective, double eps, std::uint64_t seed) {
  AttackConfig cfg;
  cfg.objective = objective;
  cfg.steps = 20;
  cfg.step_size = eps / 4.0;
  cfg.seed = seed;
  return cfg;
}

AttackConfig AttackConfig::training(Objective objective, double eps, std::uint64_t seed) {
  AttackConfig cfg;
  cfg.objective = objective;
  cfg.steps = 10;
  cfg.step_size = eps / 4.0;
  cfg.random_start = true;
  cfg.early_exit = false;
  cfg.seed = seed;
  return cfg;
}

void AttackConfig::validate(const ThreatModel& threat) const {
  require(steps >= 1, ErrorKind::config, "attack needs at least one step");
  require(restarts >= 1, ErrorKind::config, "attack needs at least one restart");
  require(std::isfinite(step_size) && (step_size > 0.0 || threat.eps == 0.0), ErrorKind::config,
          "attack step size must be positive");
}

namespace {

struct RowTask {
  std::size_t row;  // index into the caller's batch
  std::vector<double> delta;
};

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void random_start(std::vector<double>& delta, const ThreatModel& threat, Rng& rng) {
  if (threat.norm == Norm::linf) {
    for (double& v : delta) v = rng.uniform(-threat.eps, threat.eps);
    return;
  }
  for (double& v : delta) v = rng.normal();
  const double n = norm2(delta);
  const double radius = threat.eps * std::pow(rng.uniform(), 1.0 / static_cast<double>(delta.size()));
  for (double& v : delta) v = n > 0.0 ? v * radius / n : 0.0;
}

void step_delta(std::vector<double>& delta, std::span<const double> direction, const ThreatModel& threat,
                double step_size) {
  if (threat.norm == Norm::linf) {
    for (std::size_t k = 0; k < delta.size(); ++k) {
      const double s = direction[k] > 0.0 ? 1.0 : (direction[k] < 0.0 ? -1.0 : 0.0);
      delta[k] = std::clamp(delta[k] + step_size * s, -threat.eps, threat.eps);
    }
    return;
  }
  const double n = norm2(direction);
  if (n > 0.0)
    for (std::size_t k = 0; k < delta.size(); ++k) delta[k] += step_size * direction[k] / n;
  const double dn = norm2(delta);
  if (dn > threat.eps)
    for (double& v : delta) v *= threat.eps / dn;
}

/// Ascent direction of the attack objective at each perturbed row.
Tensor ascent_direction(const ModelSpec& spec, const ModelParams& params, const Tensor& points,
                        const std::vector<int>& labels, const std::vector<int>& targets,
                        const std::vector<int>& clean_predictions, const Tensor& clean_logits, Objective objective) {
  auto gradient_of = [&](auto&& build_loss) {
    Graph graph;
    const BoundModel model = bind_params(graph, spec, params, false);
    const NodeId x = graph.input(points);
    const NodeId logits = logits_node(graph, spec, model, x);
    graph.backward(build_loss(graph, logits));
    return graph.grad(x);
  };

  Tensor direction;
  switch (objective) {
    case Objective::hypocritical:
    case Objective::adversarial_untargeted:
    case Objective::adversarial_targeted: {
      const std::vector<int>& wanted = objective == Objective::adversarial_targeted ? targets : labels;
      direction = gradient_of([&](Graph& g, NodeId logits) { return g.cross_entropy(logits, wanted, Reduction::sum); });
      if (objective != Objective::adversarial_untargeted)
        for (double& v : direction.data()) v = -v;
      break;
    }
    case Objective::stability: {
      direction = gradient_of([&](Graph& g, NodeId logits) {
        return g.kl_divergence(g.constant(clean_logits), logits, Reduction::sum);
      });
      // The KL gradient vanishes where the perturbed distribution equals the
      // clean one (always the case at a zero start); such rows step along the
      // cross-entropy ascent direction away from the clean prediction instead.
      std::vector<std::size_t> flat_rows;
      for (std::size_t i = 0; i < direction.rows(); ++i) {
        const auto r = direction.row(i);
        if (std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; })) flat_rows.push_back(i);
      }
      if (!flat_rows.empty()) {
        const Tensor fallback = gradient_of(
            [&](Graph& g, NodeId logits) { return g.cross_entropy(logits, clean_predictions, Reduction::sum); });
        for (std::size_t i : flat_rows) std::copy_n(fallback.row(i).begin(), fallback.cols(), direction.row(i).begin());
      }
      break;
    }
  }
  require(direction.all_finite(), ErrorKind::numeric, "non-finite attack gradient");
  return direction;
}

}  // namespace

std::vector<AttackResult> pgd_rows(const ModelSpec& spec, const ModelParams& params, const Tensor& inputs,
                                   std::span<const int> labels, std::span<const int> targets,
                                   std::span<const std::uint64_t> streams, const ThreatModel& threat,
                                   const AttackConfig& cfg) {
  threat.validate();
  cfg.validate(threat);
  const std::size_t m = inputs.rows(), d = inputs.cols();
  require(labels.size() == m && streams.size() == m, ErrorKind::dimension, "pgd_rows argument sizes differ");
  require(targets.empty() || targets.size() == m, ErrorKind::dimension, "pgd_rows target count mismatch");
  std::vector<AttackResult> results(m);
  if (m == 0) return results;
  for (double v : inputs.data())
    require(v >= threat.clamp.lo && v <= threat.clamp.hi, ErrorKind::contract, "attack input outside clamp range");

  std::vector<int> row_targets(m, cfg.target);
  if (!targets.empty()) std::copy(targets.begin(), targets.end(), row_targets.begin());
  if (cfg.objective == Objective::adversarial_targeted) {
    const auto classes = static_cast<int>(spec.num_classes());
    for (int t : row_targets) require(t >= 0 && t < classes, ErrorKind::config, "targeted attack needs a valid target");
  }

  const Tensor clean_logits = forward_logits(spec, params, inputs);
  const std::vector<int> clean_pred = predict(clean_logits);
  auto met = [&](std::size_t row, int prediction) {
    return objective_met(cfg.objective, prediction, labels[row], row_targets[row], clean_pred[row]);
  };

  if (threat.eps == 0.0) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = inputs.row(i);
      results[i] = {std::vector<double>(r.begin(), r.end()), met(i, clean_pred[i])};
    }
    return results;
  }

  std::vector<bool> done(m, false);
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    std::vector<RowTask> tasks;
    for (std::size_t i = 0; i < m; ++i) {
      if (done[i]) continue;
      RowTask task{i, std::vector<double>(d, 0.0)};
      if (cfg.random_start || restart > 0) {
        Rng rng(stream_seed(cfg.seed, {streams[i], static_cast<std::uint64_t>(restart)}));
        random_start(task.delta, threat, rng);
      }
      tasks.push_back(std::move(task));
    }
    if (tasks.empty()) break;
    const bool last_restart = restart + 1 == cfg.restarts;

    for (int step = 0;; ++step) {
      const bool final_step = step == cfg.steps;
      Tensor points(Shape{tasks.size(), d});
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        const auto x = inputs.row(tasks[t].row);
        auto p = points.row(t);
        for (std::size_t k = 0; k < d; ++k) p[k] = threat.clamp.apply(x[k] + tasks[t].delta[k]);
      }

      if (cfg.early_exit || final_step) {
        const std::vector<int> pred = predict(forward_logits(spec, params, points));
        std::vector<RowTask> still;
        std::vector<std::size_t> keep;
        for (std::size_t t = 0; t < tasks.size(); ++t) {
          const std::size_t row = tasks[t].row;
          const bool ok = met(row, pred[t]);
          if (ok || (final_step && last_restart)) {
            const auto p = points.row(t);
            results[row] = {std::vector<double>(p.begin(), p.end()), ok};
          }
          if (ok) {
            done[row] = true;
          } else {
            keep.push_back(t);
            still.push_back(std::move(tasks[t]));
          }
        }
        tasks = std::move(still);
        if (final_step || tasks.empty()) break;
        if (keep.size() != points.rows()) points = gather_rows(points, keep);
      }

      std::vector<int> lab(tasks.size()), tgt(tasks.size()), cp(tasks.size());
      std::vector<std::size_t> rows(tasks.size());
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        rows[t] = tasks[t].row;
        lab[t] = labels[rows[t]];
        tgt[t] = row_targets[rows[t]];
        cp[t] = clean_pred[rows[t]];
      }
      const Tensor clean_rows =
          cfg.objective == Objective::stability ? gather_rows(clean_logits, rows) : Tensor();
      const Tensor direction = ascent_direction(spec, params, points, lab, tgt, cp, clean_rows, cfg.objective);
      for (std::size_t t = 0; t < tasks.size(); ++t)
        step_delta(tasks[t].delta, direction.row(t), threat, cfg.step_size);
    }
  }
  return results;
}

AttackResult pgd(const ModelSpec& spec, const ModelParams& params, std::span<const double> x, int label,
                 const ThreatModel& threat, const AttackConfig& cfg, std::uint64_t stream) {
  require(x.size() == spec.input_dim(), ErrorKind::dimension, "attack input does not match model width");
  const Tensor row(Shape{1, x.size()}, std::vector<double>(x.begin(), x.end()));
  const int labels[] = {label};
  const std::uint64_t streams[] = {stream};
  return pgd_rows(spec, params, row, labels, {}, streams, threat, cfg).front();
}

std::vector<AttackResult> parallel_pgd_rows(const ModelSpec& spec, const ModelParams& params, const Tensor& inputs,
                                            std::span<const int> labels, std::span<const int> targets,
                                            std::span<const std::uint64_t> streams, const ThreatModel& threat,
                                            const AttackConfig& cfg, std::size_t workers) {
  constexpr std::size_t kChunk = 32;
  const std::size_t n = inputs.rank() == 2 ? inputs.rows() : 0;
  require(inputs.rank() == 2, ErrorKind::dimension, "attack inputs must be a matrix");
  require(labels.size() == n && streams.size() == n, ErrorKind::dimension, "attack row count mismatch");
  require(targets.empty() || targets.size() == n, ErrorKind::dimension, "attack target count mismatch");
  std::vector<AttackResult> results(n);
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t begin = c * kChunk, end = std::min(n, begin + kChunk);
    std::vector<std::size_t> rows(end - begin);
    for (std::size_t i = begin; i < end; ++i) rows[i - begin] = i;
    const Tensor chunk = gather_rows(inputs, rows);
    const std::span<const int> chunk_targets =
        targets.empty() ? std::span<const int>() : targets.subspan(begin, end - begin);
    auto out = pgd_rows(spec, params, chunk, labels.subspan(begin, end - begin), chunk_targets,
                        streams.subspan(begin, end - begin), threat, cfg);
    std::move(out.begin(), out.end(), results.begin() + static_cast<std::ptrdiff_t>(begin));
  });
  return results;
}

std::vector<AttackResult> batch_attack(const ModelSpec& spec, const ModelParams& params, const Dataset& data,
                                       const ThreatModel& threat, const AttackConfig& cfg, std::size_t workers,
                                       std::span<const int> targets) {
  std::vector<std::uint64_t> streams(data.size());
  for (std::size_t i = 0; i < streams.size(); ++i) streams[i] = i;
  return parallel_pgd_rows(spec, params, data.inputs, data.labels, targets, streams, threat, cfg, workers);
}

Tensor attack_points(const std::vector<AttackResult>& results, std::size_t dim) {
  Tensor out(Shape{results.size(), dim});
  for (std::size_t i = 0; i < results.size(); ++i) {
    require(results[i].point.size() == dim, ErrorKind::dimension, "attack point dimension mismatch");
    std::copy(results[i].point.begin(), results[i].point.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace verilab
