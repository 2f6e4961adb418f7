#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "verilab/dataset.hpp"
#include "verilab/models.hpp"

namespace verilab {

enum class Norm { linf, l2 };

std::string to_string(Norm norm);
Norm parse_norm(const std::string& text);

struct ThreatModel {
  Norm norm = Norm::linf;
  double eps = 8.0 / 255.0;
  ClampRange clamp;

  /// l-infinity, eps = 8/255, inputs in [0, 1].
  static ThreatModel cifar_linf();
  /// l2, eps = 0.5, inputs in [0, 1].
  static ThreatModel cifar_l2();

  void validate() const;
};

enum class Objective { hypocritical, adversarial_untargeted, adversarial_targeted, stability };

std::string to_string(Objective objective);
Objective parse_objective(const std::string& text);

/// Whether `prediction` at a perturbed point achieves the objective.
bool objective_met(Objective objective, int prediction, int label, int target, int clean_prediction);

struct AttackConfig {
  Objective objective = Objective::hypocritical;
  /// Target class for adversarial_targeted (per-example targets may override).
  int target = -1;
  int steps = 20;
  double step_size = 8.0 / 255.0 / 4.0;
  int restarts = 1;
  /// When false, restart 0 starts at the clean input and later restarts start
  /// at random points of the ball; when true, every restart starts randomly.
  bool random_start = false;
  /// Stop a restart as soon as the objective is met.
  bool early_exit = true;
  std::uint64_t seed = 0;

  /// 20 steps of size eps/4 from the clean point, stopping on success.
  static AttackConfig evaluation(Objective objective, double eps, std::uint64_t seed = 0);
  /// 10 steps of size eps/4 from a random start, run to completion.
  static AttackConfig training(Objective objective, double eps, std::uint64_t seed = 0);

  void validate(const ThreatModel& threat) const;
};

struct AttackResult {
  std::vector<double> point;
  bool success = false;
};

/// Projected gradient attack on one example. Each restart r draws its random
/// start from the stream (cfg.seed, stream, r). Returns the first successful
/// point across restarts, otherwise the final iterate of the last restart.
AttackResult pgd(const ModelSpec& spec, const ModelParams& params, std::span<const double> x, int label,
                 const ThreatModel& threat, const AttackConfig& cfg, std::uint64_t stream = 0);

/// pgd() for every row of `inputs` at once; row i uses stream `streams[i]` and,
/// for targeted attacks, target `targets[i]` (or cfg.target when `targets` is
/// empty). Results are bit-identical to per-row pgd() calls.
std::vector<AttackResult> pgd_rows(const ModelSpec& spec, const ModelParams& params, const Tensor& inputs,
                                   std::span<const int> labels, std::span<const int> targets,
                                   std::span<const std::uint64_t> streams, const ThreatModel& threat,
                                   const AttackConfig& cfg);

/// pgd_rows() split into chunks of 32 rows spread over `workers` threads.
/// Output does not depend on `workers`.
std::vector<AttackResult> parallel_pgd_rows(const ModelSpec& spec, const ModelParams& params, const Tensor& inputs,
                                            std::span<const int> labels, std::span<const int> targets,
                                            std::span<const std::uint64_t> streams, const ThreatModel& threat,
                                            const AttackConfig& cfg, std::size_t workers = 1);

/// pgd() over a dataset with example i on stream i. Output does not depend on
/// `workers`.
std::vector<AttackResult> batch_attack(const ModelSpec& spec, const ModelParams& params, const Dataset& data,
                                       const ThreatModel& threat, const AttackConfig& cfg, std::size_t workers = 1,
                                       std::span<const int> targets = {});

/// Perturbed points of a ledger as an [n, d] tensor.
Tensor attack_points(const std::vector<AttackResult>& results, std::size_t dim);

inline constexpr std::size_t kBruteForceBudget = 1'000'000;

/// Exhaustive search of the threat ball on a uniform grid with
/// `grid_points_per_dim` points per axis (box corners included), plus the centre
/// and, for l2, the axis extremes. Throws a resource error if the grid exceeds
/// kBruteForceBudget points.
bool brute_force_attack(const ModelSpec& spec, const ModelParams& params, std::span<const double> x, int label,
                        const ThreatModel& threat, Objective objective, std::size_t grid_points_per_dim,
                        int target = -1);

}  // namespace verilab
