#pragma once

#include <optional>
#include <vector>

#include "verilab/dataset.hpp"
#include "verilab/models.hpp"
#include "verilab/report_format.hpp"
#include "verilab/risk.hpp"

namespace verilab {

/// Margin certificates for l-infinity distance nets, which are 1-Lipschitz in
/// the l-infinity norm: an eps-perturbation moves every output by at most eps,
/// so a gap of 2*eps between two outputs cannot be closed.
struct CertReport {
  double eps = 0.0;
  /// max_i g_i(x) - g_y(x) per example.
  std::vector<double> margins;
  std::vector<bool> nat_wrong;
  /// Misclassified examples with margin < 2*eps, over |D-|.
  Fraction cert_hyp_upper_Dminus;
  /// Examples with g_y(x) - max_{i != y} g_i(x) > 2*eps, over |D|.
  Fraction cert_adv_lower;
  std::optional<double> emp_hyp_Dminus;
  std::optional<double> emp_adv_acc;
};

/// Fills margins and the hypocritical bound with one forward pass.
/// Throws a contract error for models other than linf_dist_net.
CertReport certify_hypocritical(const ModelSpec& spec, const ModelParams& params, const Dataset& data, double eps);

/// Certified adversarial accuracy (a lower bound on robust accuracy).
Fraction certify_adversarial(const ModelSpec& spec, const ModelParams& params, const Dataset& data, double eps);

/// Both certificates.
CertReport certify(const ModelSpec& spec, const ModelParams& params, const Dataset& data, double eps);

/// Copies R_hyp(D-) and 1 - R_adv(D) from an empirical report on the same data.
void attach_empirical(CertReport& cert, const RiskReport& empirical);

/// Throws a contract error unless emp_hyp_Dminus <= cert_hyp_upper_Dminus and
/// emp_adv_acc >= cert_adv_lower (for whichever empirical values are present).
void check_soundness(const CertReport& cert);

Report cert_report_document(const CertReport& cert);

}  // namespace verilab
