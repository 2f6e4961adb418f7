#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "verilab/dataset.hpp"
#include "verilab/models.hpp"
#include "verilab/perturb.hpp"
#include "verilab/risk.hpp"

namespace verilab {

enum class TrainMethod { standard, pgd_at, trades, thrm };

std::string to_string(TrainMethod method);
TrainMethod parse_train_method(const std::string& text);

/// Objective of the inner attack each robust method trains against:
/// pgd_at -> adversarial_untargeted, trades -> stability, thrm -> hypocritical.
Objective inner_objective(TrainMethod method);

struct TrainAttack {
  ThreatModel threat;
  /// Its objective is replaced by inner_objective(method).
  AttackConfig attack;
};

struct TrainConfig {
  TrainMethod method = TrainMethod::standard;
  int epochs = 10;
  std::size_t batch_size = 128;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  /// 1-based epochs at whose start the learning rate is multiplied by lr_decay_factor.
  std::vector<int> lr_decay_epochs;
  double lr_decay_factor = 0.1;
  /// Weight of the KL term for trades and thrm.
  double lambda = 1.0;
  /// Required by pgd_at, trades and thrm.
  std::optional<TrainAttack> attack;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  /// Every k epochs, estimate adversarial and hypocritical accuracy with a
  /// 5-step attack on the first monitor_samples training examples (0 = off).
  int monitor_every = 0;
  std::size_t monitor_samples = 256;

  void validate() const;
  [[nodiscard]] double lr_at(int epoch) const;
};

struct BatchLoss {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// Training loss of one batch and its parameter gradient, with the inner
/// attack points held constant:
///  standard  CE(x, y)
///  pgd_at    CE(x_inner, y)
///  trades    CE(x, y) + lambda * KL(p(x) || p(x_inner))
///  thrm      CE(x, y) + lambda * KL(p(x) || p(x_inner))
/// CE and KL are batch means. The KL term is skipped when lambda == 0, and
/// `inner` is ignored by standard training.
BatchLoss batch_loss(const ModelSpec& spec, const ModelParams& params, TrainMethod method, double lambda,
                     const Tensor& x, std::span<const int> y, const Tensor& inner);

/// Inner attack points for a batch; row i uses attack stream streams[i].
/// Returns a copy of x when the method needs no inner attack.
Tensor inner_points(const ModelSpec& spec, const ModelParams& params, const TrainConfig& cfg, const Tensor& x,
                    std::span<const int> y, std::span<const std::uint64_t> streams, int epoch);

struct EpochMetrics {
  int epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> adv_accuracy;
  std::optional<double> hyp_accuracy;
};

/// One line such as "epoch=3 lr=0.1 loss=0.42 train_acc=0.9".
std::string format_metrics_line(const EpochMetrics& metrics);

struct TrainResult {
  ModelParams params;
  std::vector<EpochMetrics> metrics;
};

/// Minibatch SGD with momentum (v = mu*v + g + wd*theta; theta -= lr*v).
/// Batches come from a per-epoch shuffle seeded by cfg.seed. Throws a numeric
/// error naming the epoch and batch if the loss becomes non-finite.
TrainResult train(const ModelSpec& spec, const ModelParams& init, const Dataset& data, const TrainConfig& cfg);

struct SweepEntry {
  double lambda = 0.0;
  ModelParams params;
  RiskReport report;
};

/// Trains one model per lambda from the same initialization and seed, then
/// evaluates each on `heldout`.
std::vector<SweepEntry> lambda_sweep(const ModelSpec& spec, const ModelParams& init, const Dataset& train_data,
                                     const Dataset& heldout, const TrainConfig& base,
                                     std::span<const double> lambdas, const ThreatModel& eval_threat,
                                     const AttackSuite& suite, std::size_t workers = 1);

}  // namespace verilab
