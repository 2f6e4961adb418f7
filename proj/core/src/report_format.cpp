#include "verilab/report_format.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "verilab/error.hpp"
#include "verilab/risk.hpp"

namespace verilab {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

void Report::add(std::string key, ReportValue value) {
  require(!key.empty() && key.find_first_of(" =\n#") == std::string::npos, ErrorKind::contract,
          [&] { return "invalid report key '" + key + "'"; });
  require(!contains(key), ErrorKind::contract, [&] { return "duplicate report key '" + key + "'"; });
  if (const auto* s = std::get_if<std::string>(&value))
    require(s->find('\n') == std::string::npos, ErrorKind::contract, "report text values must be single-line");
  fields_.emplace_back(std::move(key), std::move(value));
}

void Report::add(std::string key, std::optional<double> value) {
  if (value) add(std::move(key), ReportValue(*value));
  else add(std::move(key), ReportValue(std::monostate{}));
}

bool Report::contains(std::string_view key) const {
  return std::any_of(fields_.begin(), fields_.end(), [&](const auto& f) { return f.first == key; });
}

const ReportValue& Report::get(std::string_view key) const {
  for (const auto& [k, v] : fields_)
    if (k == key) return v;
  fail(ErrorKind::contract, "report has no field '" + std::string(key) + "'");
}

std::optional<double> Report::number(std::string_view key) const {
  const ReportValue& v = get(key);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (std::holds_alternative<std::monostate>(v)) return std::nullopt;
  fail(ErrorKind::contract, "report field '" + std::string(key) + "' is not numeric");
}

std::string Report::to_text() const {
  std::string out;
  if (!title_.empty()) out += "# " + title_ + "\n";
  for (const auto& [key, value] : fields_) {
    out += key;
    out += " = ";
    if (std::holds_alternative<std::monostate>(value)) out += "undefined";
    else if (const auto* d = std::get_if<double>(&value)) out += format_number(*d);
    else if (const auto* b = std::get_if<bool>(&value)) out += *b ? "true" : "false";
    else out += std::get<std::string>(value);
    out += '\n';
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

ReportValue parse_value(std::string_view text) {
  if (text == "undefined") return std::monostate{};
  if (text == "true") return true;
  if (text == "false") return false;
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  if (text == "nan") return std::nan("");
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec == std::errc() && res.ptr == text.data() + text.size()) return value;
  return std::string(text);
}

}  // namespace

Report Report::parse(std::string_view text) {
  Report out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      if (line_no == 1) out.title_ = std::string(trim(body.substr(1)));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::parse, "report line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(trim(body.substr(0, eq)));
    if (key.empty()) fail(ErrorKind::parse, "report line " + std::to_string(line_no) + ": empty key");
    if (out.contains(key)) fail(ErrorKind::parse, "report line " + std::to_string(line_no) + ": duplicate key " + key);
    out.fields_.emplace_back(key, parse_value(trim(body.substr(eq + 1))));
  }
  return out;
}

void Report::append(const Report& other, std::string_view prefix) {
  for (const auto& [key, value] : other.fields_) add(std::string(prefix) + key, value);
}

Report risk_report_document(const RiskReport& r) {
  Report doc("verilab risk report v1 (empirical, attack-bounded)");
  doc.add("n", static_cast<double>(r.n));
  doc.add("n_Dplus", static_cast<double>(r.n_plus));
  doc.add("n_Dminus", static_cast<double>(r.n_minus));
  doc.add("risk_nat", r.nat.value());
  doc.add("risk_adv_D", r.adv_D.value());
  doc.add("risk_hyp_D", r.hyp_D.value());
  doc.add("risk_sta_D", r.sta_D.value());
  doc.add("risk_adv_Dplus", r.adv_Dplus.value());
  doc.add("risk_hyp_Dminus", r.hyp_Dminus.value());
  doc.add("risk_sta_Dminus", r.sta_Dminus.value());
  doc.add("risk_hyp_bar_Dminus", r.hyp_bar_Dminus.value());
  const auto complement = [](const Fraction& f) -> std::optional<double> {
    if (!f.defined()) return std::nullopt;
    return static_cast<double>(f.total - f.count) / static_cast<double>(f.total);
  };
  doc.add("acc_clean", complement(r.nat));
  doc.add("acc_adversarial", complement(r.adv_D));
  doc.add("acc_hypocritical", r.hyp_D.value());
  doc.add("residual_thm1", r.checks.thm1);
  doc.add("residual_thm2", r.checks.thm2);
  doc.add("residual_thm3", r.checks.thm3);
  doc.add("lemma1_ok", ReportValue(r.checks.lemma1_ok));
  return doc;
}

Report summarize_runs(const std::vector<Report>& runs, std::string title) {
  require(!runs.empty(), ErrorKind::contract, "summarize_runs needs at least one run");
  const auto& keys = runs.front().fields();
  for (const Report& run : runs) {
    require(run.fields().size() == keys.size(), ErrorKind::contract, "runs have different report fields");
    for (std::size_t i = 0; i < keys.size(); ++i)
      require(run.fields()[i].first == keys[i].first, ErrorKind::contract, "runs have different report fields");
  }
  Report out(std::move(title));
  out.add("runs", static_cast<double>(runs.size()));
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::string& key = keys[i].first;
    const ReportValue& first = keys[i].second;
    if (std::holds_alternative<bool>(first)) {
      bool all = true;
      for (const Report& run : runs) {
        const auto* b = std::get_if<bool>(&run.fields()[i].second);
        require(b != nullptr, ErrorKind::contract, [&] { return "field " + key + " changes type across runs"; });
        all = all && *b;
      }
      out.add(key, ReportValue(all));
      continue;
    }
    if (const auto* s = std::get_if<std::string>(&first)) {
      for (const Report& run : runs)
        require(run.fields()[i].second == first, ErrorKind::contract, [&] { return "text field " + key + " differs across runs"; });
      out.add(key, ReportValue(*s));
      continue;
    }
    std::vector<double> values;
    bool undefined = false;
    for (const Report& run : runs) {
      const ReportValue& v = run.fields()[i].second;
      if (const auto* d = std::get_if<double>(&v)) values.push_back(*d);
      else if (std::holds_alternative<std::monostate>(v)) undefined = true;
      else fail(ErrorKind::contract, "field " + key + " changes type across runs");
    }
    if (undefined) {
      out.add(key + ".mean", std::optional<double>());
      out.add(key + ".std", std::optional<double>());
      continue;
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    out.add(key + ".mean", mean);
    out.add(key + ".std", sd);
  }
  return out;
}

}  // namespace verilab
