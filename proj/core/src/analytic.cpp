#include "verilab/analytic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "verilab/datasets.hpp"
#include "verilab/error.hpp"
#include "verilab/parallel.hpp"
#include "verilab/report_format.hpp"

namespace verilab {

Rational parse_rational(const std::string& text) {
  const auto bad = [&]() -> Rational { fail(ErrorKind::config, "cannot parse '" + text + "' as an exact number"); };
  const auto parse_int = [&](std::string_view s) {
    std::int64_t v = 0;
    if (s.empty()) bad();
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) bad();
    return v;
  };
  const std::string_view s(text);
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const std::int64_t num = parse_int(s.substr(0, slash));
    const std::int64_t den = parse_int(s.substr(slash + 1));
    if (den == 0) fail(ErrorKind::config, "zero denominator in '" + text + "'");
    return Rational(num, den);
  }
  if (const auto dot = s.find('.'); dot != std::string_view::npos) {
    const std::string_view whole = s.substr(0, dot), frac = s.substr(dot + 1);
    if (frac.empty() || frac.size() > 15 || frac.front() == '-' || frac.front() == '+') bad();
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const bool negative = !whole.empty() && whole.front() == '-';
    const std::int64_t w = whole.empty() || whole == "-" ? 0 : parse_int(whole);
    const std::int64_t f = parse_int(frac);
    const std::int64_t magnitude = std::abs(w) * scale + f;
    return Rational(negative ? -magnitude : magnitude, scale);
  }
  return Rational(parse_int(s));
}

std::string to_string(const Rational& value) {
  if (value.denominator() == 1) return std::to_string(value.numerator());
  return std::to_string(value.numerator()) + "/" + std::to_string(value.denominator());
}

std::string to_string(ToyClassifier classifier) {
  return classifier == ToyClassifier::bayes_optimal ? "bayes_optimal" : "all_one";
}

ToyClassifier parse_toy_classifier(const std::string& text) {
  if (text == "bayes_optimal") return ToyClassifier::bayes_optimal;
  if (text == "all_one") return ToyClassifier::all_one;
  fail(ErrorKind::config, "unknown toy classifier '" + text + "'");
}

int toy_predict(ToyClassifier classifier, double x, double eps) {
  if (classifier == ToyClassifier::all_one) return 1;
  return piecewise_positive_rate(x, eps) > 0.5 ? 1 : 0;
}

namespace {

struct Interval {
  Rational lo;
  Rational hi;
};

std::int64_t cell_count(const Rational& eps) {
  require(eps > Rational(0) && eps <= Rational(1, 2), ErrorKind::config, [&] { return "eps must lie in (0, 1/2], got " + to_string(eps); });
  const Rational cells = Rational(1) / eps;
  require(cells.denominator() == 1 && cells.numerator() % 2 == 0, ErrorKind::config,
          [&] { return "1/(2 eps) must be an integer for the cells to tile [0, 1], got eps = " + to_string(eps); });
  require(cells.numerator() <= 2'000'000, ErrorKind::config, "eps is too small for exact evaluation");
  return cells.numerator();
}

// Measure of {x in cell : the eps-ball around x meets a cell in `targets`}.
Rational reach_measure(const Interval& cell, const std::vector<Interval>& targets, const Rational& eps) {
  std::vector<Interval> hits;
  for (const Interval& t : targets) {
    const Rational lo = std::max(cell.lo, t.lo - eps), hi = std::min(cell.hi, t.hi + eps);
    if (lo < hi) hits.push_back({lo, hi});
  }
  std::sort(hits.begin(), hits.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  Rational total(0);
  Rational end = cell.lo;
  for (const Interval& h : hits) {
    const Rational lo = std::max(h.lo, end);
    if (h.hi > lo) {
      total += h.hi - lo;
      end = h.hi;
    }
  }
  return total;
}

std::optional<Rational> ratio(const Rational& num, const Rational& den) {
  if (den == Rational(0)) return std::nullopt;
  return num / den;
}

}  // namespace

Example1Row example1_row(ToyClassifier classifier, const Rational& eps) {
  const std::int64_t cells = cell_count(eps);
  std::vector<int> pred(static_cast<std::size_t>(cells));
  std::vector<Interval> by_class[2];
  for (std::int64_t i = 0; i < cells; ++i) {
    const bool odd = i % 2 == 1;
    pred[static_cast<std::size_t>(i)] = classifier == ToyClassifier::all_one ? 1 : (odd ? 1 : 0);
    by_class[pred[static_cast<std::size_t>(i)]].push_back({eps * i, eps * (i + 1)});
  }

  Rational wrong(0), correct(0), adv_plus(0), hyp_minus(0), sta_minus(0), bar_minus(0);
  for (std::int64_t i = 0; i < cells; ++i) {
    const Interval cell{eps * i, eps * (i + 1)};
    const Rational positive = i % 2 == 1 ? Rational(1) : Rational(1, 4);
    const int p = pred[static_cast<std::size_t>(i)];
    const Rational flip = reach_measure(cell, by_class[1 - p], eps) / eps;
    for (int y : {0, 1}) {
      const Rational mass = eps * (y == 1 ? positive : 1 - positive);
      if (mass == Rational(0)) continue;
      if (p == y) {
        correct += mass;
        adv_plus += mass * flip;
      } else {
        // binary labels: reaching the true label and changing the prediction coincide
        wrong += mass;
        hyp_minus += mass * flip;
        sta_minus += mass * flip;
        bar_minus += mass * flip;
      }
    }
  }
  Example1Row row;
  row.classifier = classifier;
  row.R_nat = wrong;
  row.R_adv_D = wrong + adv_plus;
  row.R_hyp_D = correct + hyp_minus;
  row.R_sta_D = adv_plus + sta_minus;
  row.R_adv_Dplus = ratio(adv_plus, correct);
  row.R_hyp_Dminus = ratio(hyp_minus, wrong);
  row.R_sta_Dminus = ratio(sta_minus, wrong);
  row.R_hyp_bar_Dminus = ratio(bar_minus, wrong);
  return row;
}

std::array<Example1Row, 2> example1_table(const Rational& eps) {
  return {example1_row(ToyClassifier::bayes_optimal, eps), example1_row(ToyClassifier::all_one, eps)};
}

std::array<Rational, 3> example1_residuals(const Example1Row& r) {
  std::array<Rational, 3> out{Rational(0), Rational(0), Rational(0)};
  const Rational adv_plus = r.R_adv_Dplus.value_or(0), hyp_minus = r.R_hyp_Dminus.value_or(0),
                 sta_minus = r.R_sta_Dminus.value_or(0);
  out[0] = r.R_adv_D - (r.R_nat + (1 - r.R_nat) * adv_plus);
  out[1] = r.R_hyp_D - (1 - (1 - hyp_minus) * r.R_nat);
  out[2] = r.R_sta_D - ((1 - r.R_nat) * adv_plus + r.R_nat * sta_minus);
  return out;
}

std::string format_example1_table(const std::array<Example1Row, 2>& rows, const Rational& eps) {
  const auto opt = [](const std::optional<Rational>& v) { return v ? to_string(*v) : std::string("undefined"); };
  std::string out = "# eps = " + to_string(eps) + "\n";
  out += "classifier,R_nat,R_hyp_D,R_adv_D,R_hyp_Dminus,R_adv_Dplus\n";
  for (const Example1Row& r : rows) {
    out += to_string(r.classifier) + "," + to_string(r.R_nat) + "," + to_string(r.R_hyp_D) + "," +
           to_string(r.R_adv_D) + "," + opt(r.R_hyp_Dminus) + "," + opt(r.R_adv_Dplus) + "\n";
  }
  return out;
}

std::vector<Example2Point> example2_curves(std::span<const double> b_grid, const Example2Setup& setup,
                                           std::size_t workers) {
  require(std::isfinite(setup.eps) && setup.eps > 0.0, ErrorKind::config, "example2 eps must be > 0");
  require(setup.resolution >= 2, ErrorKind::config, "example2 resolution must be >= 2");
  require(setup.radius > 0.0, ErrorKind::config, "example2 radius must be > 0");
  for (double b : b_grid)
    require(b >= 0.0 && b <= 1.0, ErrorKind::config, "example2 thresholds must lie in [0, 1]");

  const std::size_t N = setup.resolution;
  const double h = 1.0 / static_cast<double>(N);
  const double r2 = setup.radius * setup.radius;
  // positives[j]: cells of row j inside the disc
  std::vector<std::int64_t> positives(N, 0);
  parallel_for(N, workers, [&](std::size_t j) {
    const double x2 = (static_cast<double>(j) + 0.5) * h;
    const double dy = x2 - setup.center[1];
    std::int64_t count = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double dx = (static_cast<double>(i) + 0.5) * h - setup.center[0];
      count += dx * dx + dy * dy < r2;
    }
    positives[j] = count;
  });

  const auto n = static_cast<std::int64_t>(N);
  const auto frac = [](std::int64_t num, std::int64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  std::vector<Example2Point> out;
  out.reserve(b_grid.size());
  for (double b : b_grid) {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0, correct_strip = 0, wrong_strip = 0;
    for (std::size_t j = 0; j < N; ++j) {
      const double x2 = (static_cast<double>(j) + 0.5) * h;
      const std::int64_t pos = positives[j], neg = n - pos;
      const bool predicted_positive = x2 - b > 0.0;
      const bool in_strip = std::abs(x2 - b) <= setup.eps;
      if (predicted_positive) {
        tp += pos;
        fp += neg;
      } else {
        fn += pos;
        tn += neg;
      }
      if (in_strip) {
        correct_strip += predicted_positive ? pos : neg;
        wrong_strip += predicted_positive ? neg : pos;
      }
    }
    out.push_back({b, frac(tp, tp + fp), frac(tp, tp + fn), frac(correct_strip, tp + tn), frac(wrong_strip, fp + fn)});
  }
  return out;
}

std::string format_example2_csv(const std::vector<Example2Point>& points) {
  const auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("undefined"); };
  std::string out = "b,precision,recall,adv_risk_Dplus,hyp_risk_Dminus\n";
  for (const Example2Point& p : points)
    out += format_number(p.b) + "," + opt(p.precision) + "," + opt(p.recall) + "," + opt(p.R_adv_Dplus) + "," +
           opt(p.R_hyp_Dminus) + "\n";
  return out;
}

bool SamplerComparison::all_within() const {
  return std::all_of(risks.begin(), risks.end(), [](const SampledRisk& r) { return r.within; });
}

SamplerComparison example1_sampler_consistency(ToyClassifier classifier, std::size_t n, std::uint64_t seed,
                                               const Rational& eps) {
  require(n >= 10'000, ErrorKind::config, "sampler consistency needs at least 10^4 samples");
  const Example1Row exact = example1_row(classifier, eps);
  const double e = boost::rational_cast<double>(eps);
  const std::int64_t cells = cell_count(eps);

  SyntheticSpec spec;
  spec.kind = SyntheticKind::d1_piecewise;
  spec.samples = n;
  spec.seed = seed;
  spec.interval_eps = e;
  const Dataset data = gen_synthetic(spec);

  const auto cell_of = [&](double x) {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(x / e)), 0, cells - 1);
  };
  IndicatorLedger ledger;
  ledger.entries.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = data.inputs[i];
    const int y = data.labels[i];
    const int clean = toy_predict(classifier, x, e);
    // the classifier is constant on cells, so the cells the ball touches give
    // every reachable prediction
    bool reach[2] = {false, false};
    const std::int64_t first = cell_of(std::max(0.0, x - e)), last = cell_of(std::min(1.0, x + e));
    for (std::int64_t c = first; c <= last; ++c)
      reach[toy_predict(classifier, (static_cast<double>(c) + 0.5) * e, e)] = true;
    LedgerEntry& entry = ledger.entries[i];
    entry.nat_wrong = clean != y;
    if (entry.nat_wrong) {
      entry.adv_success = true;
      entry.hyp_success = reach[y];
      entry.hyp_changed = entry.hyp_success;
      entry.sta_success = reach[1 - clean];
    } else {
      entry.hyp_success = true;
      entry.adv_success = reach[1 - y];
      entry.sta_success = entry.adv_success;
    }
  }

  SamplerComparison out;
  out.classifier = classifier;
  out.n = n;
  out.seed = seed;
  out.report = estimate_risks(ledger);
  const auto compare = [&](std::string name, const Rational& expected, const Fraction& sampled) {
    if (!sampled.defined()) return;
    const double p = boost::rational_cast<double>(expected);
    const double s = *sampled.value();
    const double sigma = std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(sampled.total));
    out.risks.push_back({std::move(name), p, s, sigma, std::abs(s - p) <= 3.0 * sigma + 1e-12});
  };
  compare("R_nat", exact.R_nat, out.report.nat);
  compare("R_hyp_D", exact.R_hyp_D, out.report.hyp_D);
  compare("R_adv_D", exact.R_adv_D, out.report.adv_D);
  if (exact.R_hyp_Dminus) compare("R_hyp_Dminus", *exact.R_hyp_Dminus, out.report.hyp_Dminus);
  if (exact.R_adv_Dplus) compare("R_adv_Dplus", *exact.R_adv_Dplus, out.report.adv_Dplus);
  return out;
}

}  // namespace verilab
