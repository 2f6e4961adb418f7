#include "verilab/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "verilab/error.hpp"

namespace verilab {

namespace {

void require_certifiable(const ModelSpec& spec, const Dataset& data, double eps) {
  require(spec.kind == ModelKind::linf_dist_net, ErrorKind::contract,
          [&] { return "certification requires an linf_dist_net model, got " + to_string(spec.kind); });
  require(std::isfinite(eps) && eps >= 0.0, ErrorKind::config, "certification eps must be finite and >= 0");
  data.validate();
}

double robust_gap(std::span<const double> g, int y) {
  double other = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (static_cast<int>(i) != y) other = std::max(other, g[i]);
  return g[static_cast<std::size_t>(y)] - other;
}

}  // namespace

CertReport certify_hypocritical(const ModelSpec& spec, const ModelParams& params, const Dataset& data, double eps) {
  require_certifiable(spec, data, eps);
  CertReport out;
  out.eps = eps;
  const Tensor g = forward_logits(spec, params, data.inputs);
  const std::size_t n = data.size();
  out.margins.resize(n);
  out.nat_wrong.resize(n);
  std::size_t wrong = 0, bounded = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = g.row(i);
    out.margins[i] = margin(row, data.labels[i]);
    out.nat_wrong[i] = predict_row(row) != data.labels[i];
    if (!out.nat_wrong[i]) continue;
    ++wrong;
    bounded += out.margins[i] < 2.0 * eps;
  }
  out.cert_hyp_upper_Dminus = {bounded, wrong};
  return out;
}

Fraction certify_adversarial(const ModelSpec& spec, const ModelParams& params, const Dataset& data, double eps) {
  require_certifiable(spec, data, eps);
  const Tensor g = forward_logits(spec, params, data.inputs);
  std::size_t certified = 0;
  for (std::size_t i = 0; i < data.size(); ++i) certified += robust_gap(g.row(i), data.labels[i]) > 2.0 * eps;
  return {certified, data.size()};
}

CertReport certify(const ModelSpec& spec, const ModelParams& params, const Dataset& data, double eps) {
  CertReport out = certify_hypocritical(spec, params, data, eps);
  out.cert_adv_lower = certify_adversarial(spec, params, data, eps);
  return out;
}

void attach_empirical(CertReport& cert, const RiskReport& empirical) {
  require(empirical.n == cert.margins.size(), ErrorKind::dimension, "empirical report covers a different dataset");
  cert.emp_hyp_Dminus = empirical.hyp_Dminus.value();
  const Fraction& adv = empirical.adv_D;
  if (adv.defined()) cert.emp_adv_acc = Fraction{adv.total - adv.count, adv.total}.value();
}

void check_soundness(const CertReport& cert) {
  if (cert.emp_hyp_Dminus) {
    const auto bound = cert.cert_hyp_upper_Dminus.value();
    require(bound.has_value(), ErrorKind::contract, "empirical hypocritical risk without a certified bound");
    require(*cert.emp_hyp_Dminus <= *bound, ErrorKind::contract,
            [&] { return "soundness violated: empirical hypocritical risk " + format_number(*cert.emp_hyp_Dminus) +
                " exceeds certified bound " + format_number(*bound); });
  }
  if (cert.emp_adv_acc) {
    const double lower = cert.cert_adv_lower.value().value_or(0.0);
    require(*cert.emp_adv_acc >= lower, ErrorKind::contract,
            [&] { return "soundness violated: empirical adversarial accuracy " + format_number(*cert.emp_adv_acc) +
                " is below certified accuracy " + format_number(lower); });
  }
}

Report cert_report_document(const CertReport& cert) {
  Report doc("verilab certificate report v1");
  doc.add("eps", cert.eps);
  doc.add("n", static_cast<double>(cert.margins.size()));
  doc.add("n_Dminus", static_cast<double>(cert.cert_hyp_upper_Dminus.total));
  doc.add("cert_hyp_upper_Dminus", cert.cert_hyp_upper_Dminus.value());
  doc.add("cert_adv_lower", cert.cert_adv_lower.value());
  doc.add("emp_hyp_Dminus", cert.emp_hyp_Dminus);
  doc.add("emp_adv_acc", cert.emp_adv_acc);
  return doc;
}

}  // namespace verilab
