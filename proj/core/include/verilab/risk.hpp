#pragma once

#include <optional>
#include <span>
#include <vector>

#include "verilab/dataset.hpp"
#include "verilab/models.hpp"
#include "verilab/perturb.hpp"

namespace verilab {

/// Indicator flags of one verification example.
struct LedgerEntry {
  bool nat_wrong = false;    // f(x) != y
  bool adv_success = false;  // some found x' in the ball has f(x') != y
  bool hyp_success = false;  // some found x' in the ball has f(x') == y
  bool sta_success = false;  // some found x' in the ball has f(x') != f(x)
  bool hyp_changed = false;  // f(x_hyp) != f(x) for the hypocritical attack's point
  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

/// Per-example indicators for one model and threat model.
///
/// Consistency rules (checked by validate()):
///  - correct examples: hyp_success, and hyp_changed is false, and
///    sta_success == adv_success (for f(x) = y both predicates read f(x') != y);
///  - misclassified examples: adv_success, and hyp_success implies hyp_changed,
///    and hyp_changed implies sta_success.
struct IndicatorLedger {
  std::vector<LedgerEntry> entries;

  [[nodiscard]] std::size_t size() const { return entries.size(); }
  void validate() const;
};

/// Attack settings for the three objectives a ledger needs.
struct AttackSuite {
  AttackConfig hypocritical;
  AttackConfig adversarial;
  AttackConfig stability;

  /// Evaluation defaults (20 steps, eps/4) with `restarts` starts each.
  static AttackSuite evaluation(double eps, std::uint64_t seed = 0, int restarts = 1);
};

/// Runs the three attacks over `data` and combines their outcomes.
///
/// Every point an attack returns lies in the threat ball, so it is a witness
/// for any predicate it satisfies: on correct examples the adversarial and
/// stability flags both take the OR of the two attacks, and on misclassified
/// examples the stability flag also accepts the hypocritical point when it
/// changed the prediction.
IndicatorLedger build_ledger(const ModelSpec& spec, const ModelParams& params, const Dataset& data,
                             const ThreatModel& threat, const AttackSuite& suite, std::size_t workers = 1);

/// count / total; undefined when total == 0.
struct Fraction {
  std::size_t count = 0;
  std::size_t total = 0;

  [[nodiscard]] bool defined() const { return total > 0; }
  [[nodiscard]] std::optional<double> value() const {
    if (total == 0) return std::nullopt;
    return static_cast<double>(count) / static_cast<double>(total);
  }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

/// Absolute residuals of the three decomposition identities (nullopt when the
/// identity involves an undefined conditional risk) and the ordering chain of
/// the conditional risks.
struct DecompositionCheck {
  std::optional<double> thm1;
  std::optional<double> thm2;
  std::optional<double> thm3;
  bool lemma1_ok = true;
};

inline constexpr double kLemmaTolerance = 1e-12;

/// Empirical risks. Values are lower bounds on the true (max over the ball)
/// risks since attacks under-approximate the maximum.
struct RiskReport {
  std::size_t n = 0;
  std::size_t n_plus = 0;
  std::size_t n_minus = 0;
  Fraction nat;
  Fraction adv_D;
  Fraction hyp_D;
  Fraction sta_D;
  Fraction adv_Dplus;
  Fraction hyp_Dminus;
  Fraction sta_Dminus;
  Fraction hyp_bar_Dminus;
  DecompositionCheck checks;
};

RiskReport estimate_risks(const IndicatorLedger& ledger);

DecompositionCheck check_decompositions(const RiskReport& report);

/// Success rate of an attack objective within its meaningful partition:
/// hypocritical -> R_hyp(D-), adversarial -> R_adv(D+), stability -> R_sta(D).
std::optional<double> attack_success_rate(const IndicatorLedger& ledger, Objective objective);

/// Fraction of misclassified examples whose targeted attack reached its target.
std::optional<double> targeted_success_rate(const IndicatorLedger& ledger,
                                            const std::vector<AttackResult>& targeted_results);

}  // namespace verilab
