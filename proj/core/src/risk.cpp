#include "verilab/risk.hpp"

#include <cmath>

#include "verilab/error.hpp"

namespace verilab {

void IndicatorLedger::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const LedgerEntry& e = entries[i];
    const std::string where = "ledger entry " + std::to_string(i);
    if (e.nat_wrong) {
      require(e.adv_success, ErrorKind::contract, [&] { return where + ": misclassified example without adv_success"; });
      require(!e.hyp_success || e.hyp_changed, ErrorKind::contract, [&] { return where + ": hyp_success without hyp_changed"; });
      require(!e.hyp_changed || e.sta_success, ErrorKind::contract, [&] { return where + ": hyp_changed without sta_success"; });
    } else {
      require(e.hyp_success, ErrorKind::contract, [&] { return where + ": correct example without hyp_success"; });
      require(!e.hyp_changed, ErrorKind::contract, [&] { return where + ": correct example with hyp_changed"; });
      require(e.sta_success == e.adv_success, ErrorKind::contract, [&] { return where + ": sta/adv flags disagree on D+"; });
    }
  }
}

AttackSuite AttackSuite::evaluation(double eps, std::uint64_t seed, int restarts) {
  AttackSuite suite{AttackConfig::evaluation(Objective::hypocritical, eps, seed),
                    AttackConfig::evaluation(Objective::adversarial_untargeted, eps, seed),
                    AttackConfig::evaluation(Objective::stability, eps, seed)};
  suite.hypocritical.restarts = suite.adversarial.restarts = suite.stability.restarts = restarts;
  return suite;
}

IndicatorLedger build_ledger(const ModelSpec& spec, const ModelParams& params, const Dataset& data,
                             const ThreatModel& threat, const AttackSuite& suite, std::size_t workers) {
  require(suite.hypocritical.objective == Objective::hypocritical &&
              suite.adversarial.objective == Objective::adversarial_untargeted &&
              suite.stability.objective == Objective::stability,
          ErrorKind::config, "attack suite objectives are mislabelled");
  const std::size_t n = data.size();
  IndicatorLedger ledger;
  ledger.entries.resize(n);
  if (n == 0) return ledger;

  const std::vector<int> clean = predict(forward_logits(spec, params, data.inputs));
  const auto hyp = batch_attack(spec, params, data, threat, suite.hypocritical, workers);
  const auto adv = batch_attack(spec, params, data, threat, suite.adversarial, workers);
  const auto sta = batch_attack(spec, params, data, threat, suite.stability, workers);
  const Tensor hyp_points = attack_points(hyp, data.dim());
  const std::vector<int> hyp_pred = predict(forward_logits(spec, params, hyp_points));

  for (std::size_t i = 0; i < n; ++i) {
    LedgerEntry& e = ledger.entries[i];
    e.nat_wrong = clean[i] != data.labels[i];
    if (e.nat_wrong) {
      e.adv_success = true;
      e.hyp_success = hyp[i].success;
      e.hyp_changed = hyp_pred[i] != clean[i];
      e.sta_success = sta[i].success || e.hyp_changed;
    } else {
      e.hyp_success = true;
      e.hyp_changed = false;
      e.adv_success = adv[i].success || sta[i].success;
      e.sta_success = e.adv_success;
    }
  }
  return ledger;
}

RiskReport estimate_risks(const IndicatorLedger& ledger) {
  require(ledger.size() > 0, ErrorKind::contract, "cannot estimate risks from an empty ledger");
  ledger.validate();
  RiskReport r;
  r.n = ledger.size();
  std::size_t adv = 0, hyp = 0, sta = 0, adv_plus = 0, hyp_minus = 0, sta_minus = 0, bar_minus = 0;
  for (const LedgerEntry& e : ledger.entries) {
    if (e.nat_wrong) {
      ++r.n_minus;
      hyp_minus += e.hyp_success;
      sta_minus += e.sta_success;
      bar_minus += e.hyp_changed;
    } else {
      ++r.n_plus;
      adv_plus += e.adv_success;
    }
    adv += e.nat_wrong || e.adv_success;
    hyp += !e.nat_wrong || e.hyp_success;
    sta += e.sta_success;
  }
  r.nat = {r.n_minus, r.n};
  r.adv_D = {adv, r.n};
  r.hyp_D = {hyp, r.n};
  r.sta_D = {sta, r.n};
  r.adv_Dplus = {adv_plus, r.n_plus};
  r.hyp_Dminus = {hyp_minus, r.n_minus};
  r.sta_Dminus = {sta_minus, r.n_minus};
  r.hyp_bar_Dminus = {bar_minus, r.n_minus};
  r.checks = check_decompositions(r);
  return r;
}

DecompositionCheck check_decompositions(const RiskReport& report) {
  DecompositionCheck out;
  const double nat = report.nat.value().value_or(0.0);
  const auto adv_plus = report.adv_Dplus.value();
  const auto hyp_minus = report.hyp_Dminus.value();
  const auto sta_minus = report.sta_Dminus.value();
  const auto bar_minus = report.hyp_bar_Dminus.value();
  const double adv = report.adv_D.value().value_or(0.0);
  const double hyp = report.hyp_D.value().value_or(0.0);
  const double sta = report.sta_D.value().value_or(0.0);

  if (adv_plus) out.thm1 = std::abs(adv - (nat + (1.0 - nat) * *adv_plus));
  if (hyp_minus) out.thm2 = std::abs(hyp - (1.0 - (1.0 - *hyp_minus) * nat));
  if (adv_plus && sta_minus) out.thm3 = std::abs(sta - ((1.0 - nat) * *adv_plus + nat * *sta_minus));
  if (hyp_minus && bar_minus && sta_minus)
    out.lemma1_ok = *hyp_minus <= *bar_minus + kLemmaTolerance && *bar_minus <= *sta_minus + kLemmaTolerance;
  return out;
}

std::optional<double> attack_success_rate(const IndicatorLedger& ledger, Objective objective) {
  const RiskReport r = estimate_risks(ledger);
  switch (objective) {
    case Objective::hypocritical: return r.hyp_Dminus.value();
    case Objective::adversarial_untargeted: return r.adv_Dplus.value();
    case Objective::stability: return r.sta_D.value();
    case Objective::adversarial_targeted:
      fail(ErrorKind::contract, "targeted success needs the targeted attack results");
  }
  return std::nullopt;
}

std::optional<double> targeted_success_rate(const IndicatorLedger& ledger,
                                            const std::vector<AttackResult>& targeted_results) {
  require(targeted_results.size() == ledger.size(), ErrorKind::dimension, "targeted results do not match ledger");
  std::size_t hits = 0, total = 0;
  for (std::size_t i = 0; i < ledger.size(); ++i) {
    if (!ledger.entries[i].nat_wrong) continue;
    ++total;
    hits += targeted_results[i].success;
  }
  return Fraction{hits, total}.value();
}

}  // namespace verilab
