#include <doctest.h>

#include "verilab/analytic.hpp"
#include "verilab/error.hpp"

using namespace verilab;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::contract;
}

// Exact all-one and Bayes values on the piecewise distribution.
const Rational kBayes[5] = {Rational(1, 8), Rational(1), Rational(1), Rational(1), Rational(1)};
const Rational kAllOne[5] = {Rational(3, 8), Rational(5, 8), Rational(3, 8), Rational(0), Rational(0)};

}  // namespace

TEST_CASE("rational parsing") {
  CHECK(parse_rational("1/10") == Rational(1, 10));
  CHECK(parse_rational("0.125") == Rational(1, 8));
  CHECK(parse_rational("-0.5") == Rational(-1, 2));
  CHECK(parse_rational("3") == Rational(3));
  CHECK(to_string(Rational(2, 4)) == "1/2");
  CHECK(kind_of([] { parse_rational("1/0"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_rational("abc"); }) == ErrorKind::config);
}

TEST_CASE("example 1 table is exact for every tiling eps") {
  for (const Rational& eps : {Rational(1, 10), Rational(1, 2), Rational(1, 4), Rational(1, 50)}) {
    const auto table = example1_table(eps);
    const Example1Row& b = table[0];
    const Example1Row& a = table[1];
    CHECK(b.classifier == ToyClassifier::bayes_optimal);
    CHECK(b.R_nat == kBayes[0]);
    CHECK(b.R_hyp_D == kBayes[1]);
    CHECK(b.R_adv_D == kBayes[2]);
    CHECK(*b.R_hyp_Dminus == kBayes[3]);
    CHECK(*b.R_adv_Dplus == kBayes[4]);
    CHECK(a.R_nat == kAllOne[0]);
    CHECK(a.R_hyp_D == kAllOne[1]);
    CHECK(a.R_adv_D == kAllOne[2]);
    CHECK(*a.R_hyp_Dminus == kAllOne[3]);
    CHECK(*a.R_adv_Dplus == kAllOne[4]);
    for (const Example1Row& row : table)
      for (const Rational& r : example1_residuals(row)) CHECK(r == Rational(0));
  }
}

TEST_CASE("example 1 rejects eps that does not tile the unit interval") {
  CHECK(kind_of([] { example1_table(Rational(3, 10)); }) == ErrorKind::config);
  CHECK(kind_of([] { example1_table(Rational(0)); }) == ErrorKind::config);
  CHECK(kind_of([] { example1_table(Rational(1)); }) == ErrorKind::config);
  CHECK(kind_of([] { example1_table(Rational(1, 3)); }) == ErrorKind::config);
}

TEST_CASE("example 1 table formatting") {
  const std::string text = format_example1_table(example1_table(Rational(1, 10)), Rational(1, 10));
  CHECK(text ==
        "# eps = 1/10\n"
        "classifier,R_nat,R_hyp_D,R_adv_D,R_hyp_Dminus,R_adv_Dplus\n"
        "bayes_optimal,1/8,1,1,1,1\n"
        "all_one,3/8,5/8,3/8,0,0\n");
}

TEST_CASE("example 2 boundary thresholds") {
  Example2Setup setup;
  setup.resolution = 1000;
  const std::vector<double> grid{0.0, 1.0};
  const auto pts = example2_curves(grid, setup);
  CHECK(pts[0].recall == 1.0);
  CHECK(pts[1].recall == 0.0);
  CHECK(!pts[1].precision.has_value());
  // at b = 0 precision is the disc area
  CHECK(*pts[0].precision == doctest::Approx(3.14159265 * 0.16).epsilon(2e-3));
  const std::vector<double> bad{1.5};
  CHECK(kind_of([&] { example2_curves(bad, setup); }) == ErrorKind::config);
}

TEST_CASE("example 2 risks move in opposite directions") {
  std::vector<double> grid;
  for (int i = 0; i <= 32; ++i) grid.push_back(0.1 + 0.025 * i);
  Example2Setup setup;
  setup.resolution = 1000;
  const auto pts = example2_curves(grid, setup);
  for (const auto& p : pts)
    for (const auto& v : {p.precision, p.recall, p.R_adv_Dplus, p.R_hyp_Dminus})
      if (v) CHECK((*v >= 0.0 && *v <= 1.0));
  int strict = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double da = *pts[i].R_adv_Dplus - *pts[i - 1].R_adv_Dplus;
    const double dh = *pts[i].R_hyp_Dminus - *pts[i - 1].R_hyp_Dminus;
    // changes below the integration noise floor carry no direction
    if (std::abs(da) < 1e-3 && std::abs(dh) < 1e-3) continue;
    CHECK(da * dh < 0.0);
    ++strict;
  }
  CHECK(strict > 20);
}

TEST_CASE("example 2 is stable under doubling the resolution") {
  const std::vector<double> grid{0.15, 0.35, 0.5, 0.65, 0.85};
  Example2Setup coarse, fine;
  coarse.resolution = 1000;
  fine.resolution = 2000;
  const auto a = example2_curves(grid, coarse), b = example2_curves(grid, fine, 2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(*a[i].precision - *b[i].precision) < 1e-3);
    CHECK(std::abs(*a[i].recall - *b[i].recall) < 1e-3);
    CHECK(std::abs(*a[i].R_adv_Dplus - *b[i].R_adv_Dplus) < 1e-3);
    CHECK(std::abs(*a[i].R_hyp_Dminus - *b[i].R_hyp_Dminus) < 1e-3);
  }
  CHECK(format_example2_csv(a).rfind("b,precision,recall,adv_risk_Dplus,hyp_risk_Dminus\n", 0) == 0);
}

TEST_CASE("sampled example 1 agrees with the exact table") {
  for (ToyClassifier c : {ToyClassifier::all_one, ToyClassifier::bayes_optimal}) {
    const SamplerComparison cmp = example1_sampler_consistency(c, 100000, 11, Rational(1, 10));
    CHECK(cmp.all_within());
    const SamplerComparison again = example1_sampler_consistency(c, 100000, 11, Rational(1, 10));
    CHECK(again.report.nat == cmp.report.nat);
    CHECK(again.report.hyp_D == cmp.report.hyp_D);
    CHECK(cmp.risks.size() >= 3);
  }
  CHECK(kind_of([] { example1_sampler_consistency(ToyClassifier::all_one, 100, 1, Rational(1, 10)); }) ==
        ErrorKind::config);
}
