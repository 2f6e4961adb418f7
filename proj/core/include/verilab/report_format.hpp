#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace verilab {

struct RiskReport;
struct CertReport;

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Value of one report field. monostate marks an undefined quantity.
using ReportValue = std::variant<std::monostate, double, bool, std::string>;

/// Ordered key/value document serialized as
///
///   # <title>
///   key = value
///
/// with numbers in shortest round-trip form, flags as true/false and
/// undefined values as the word "undefined".
class Report {
 public:
  Report() = default;
  explicit Report(std::string title) : title_(std::move(title)) {}

  void add(std::string key, ReportValue value);
  void add(std::string key, std::optional<double> value);
  void add(std::string key, double value) { add(std::move(key), ReportValue(value)); }

  [[nodiscard]] const std::string& title() const { return title_; }
  [[nodiscard]] const std::vector<std::pair<std::string, ReportValue>>& fields() const { return fields_; }
  /// Throws a contract error when `key` is absent.
  [[nodiscard]] const ReportValue& get(std::string_view key) const;
  [[nodiscard]] bool contains(std::string_view key) const;
  [[nodiscard]] std::optional<double> number(std::string_view key) const;

  [[nodiscard]] std::string to_text() const;
  static Report parse(std::string_view text);

  /// Appends every field of `other` with `prefix` prepended to its key.
  void append(const Report& other, std::string_view prefix = {});

  friend bool operator==(const Report&, const Report&) = default;

 private:
  std::string title_;
  std::vector<std::pair<std::string, ReportValue>> fields_;
};

/// Fields of a risk report: counts, the eight risks, clean/adversarial/
/// hypocritical accuracies and the decomposition residuals.
Report risk_report_document(const RiskReport& report);

/// Combines reports with identical keys: numeric fields become key.mean and
/// key.std (sample standard deviation, 0 for a single run), flags are ANDed,
/// strings must agree, and any undefined run makes the field undefined.
Report summarize_runs(const std::vector<Report>& runs, std::string title);

}  // namespace verilab
