#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "verilab/risk.hpp"

namespace verilab {

using Rational = boost::rational<std::int64_t>;

/// Parses "p/q", an integer, or a plain decimal such as "0.125" exactly.
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& value);

// One-dimensional piecewise distribution: x ~ U[0, 1], eps = 1/(2K), and
// Pr(y = +1 | x) is 1/4 on even cells [2k eps, (2k+1) eps) and 1 on odd cells.

enum class ToyClassifier { bayes_optimal, all_one };

std::string to_string(ToyClassifier classifier);
ToyClassifier parse_toy_classifier(const std::string& text);

/// Class (1 = positive) the toy classifier predicts at x.
int toy_predict(ToyClassifier classifier, double x, double eps);

struct Example1Row {
  ToyClassifier classifier = ToyClassifier::bayes_optimal;
  Rational R_nat;
  Rational R_hyp_D;
  Rational R_adv_D;
  Rational R_sta_D;
  /// Undefined when the classifier makes no (resp. only) mistakes.
  std::optional<Rational> R_hyp_Dminus;
  std::optional<Rational> R_adv_Dplus;
  std::optional<Rational> R_sta_Dminus;
  std::optional<Rational> R_hyp_bar_Dminus;
};

/// Exact risks of one classifier. A point is flippable when its eps-ball meets
/// a cell with a different prediction and correctable when the ball meets a
/// cell predicting its true label. Throws a config error unless 1/(2 eps) is a
/// positive integer.
Example1Row example1_row(ToyClassifier classifier, const Rational& eps);

/// Bayes optimal row followed by the all-one row.
std::array<Example1Row, 2> example1_table(const Rational& eps);

/// Exact residuals of the three decomposition identities (zero when undefined
/// terms make an identity inapplicable).
std::array<Rational, 3> example1_residuals(const Example1Row& row);

std::string format_example1_table(const std::array<Example1Row, 2>& rows, const Rational& eps);

struct Example2Setup {
  double eps = 0.1;
  std::array<double, 2> center{0.5, 0.5};
  double radius = 0.4;
  /// Cells per axis of the midpoint integration grid.
  std::size_t resolution = 2000;
};

/// Linear classifier sign(x2 - b) against the disc oracle on [0, 1]^2 under
/// l2 perturbations of size eps. Ratios are cell-count ratios of the grid.
struct Example2Point {
  double b = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> R_adv_Dplus;
  std::optional<double> R_hyp_Dminus;
};

std::vector<Example2Point> example2_curves(std::span<const double> b_grid, const Example2Setup& setup,
                                           std::size_t workers = 1);

/// Header line plus one "b,precision,recall,adv_risk_Dplus,hyp_risk_Dminus" line per point.
std::string format_example2_csv(const std::vector<Example2Point>& points);

struct SampledRisk {
  std::string name;
  double exact = 0.0;
  double sampled = 0.0;
  double sigma = 0.0;
  bool within = false;
};

struct SamplerComparison {
  ToyClassifier classifier = ToyClassifier::bayes_optimal;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  RiskReport report;
  /// R_nat, R_hyp_D, R_adv_D, then the conditional risks that are defined.
  std::vector<SampledRisk> risks;
  [[nodiscard]] bool all_within() const;
};

/// Samples n points, finds every reachable prediction in each eps-ball
/// exhaustively, and compares the resulting empirical risks with
/// example1_row() using a 3-sigma binomial band. Requires n >= 10^4.
SamplerComparison example1_sampler_consistency(ToyClassifier classifier, std::size_t n, std::uint64_t seed,
                                               const Rational& eps);

}  // namespace verilab
