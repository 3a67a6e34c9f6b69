#ifndef PILM_REPORT_HPP
#define PILM_REPORT_HPP

// Flat key = value run reports. The first entry names the experiment;
// numeric entries take part in comparisons, text entries only need to
// be present in both.

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pilm {

class RunReport {
 public:
  RunReport() = default;
  explicit RunReport(std::string experiment) : experiment_(std::move(experiment)) {}

  const std::string& experiment() const { return experiment_; }

  /// Numbers are written with `digits` significant digits.
  void set(const std::string& key, double value, int digits = 6);
  void set(const std::string& key, long long value);
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

  std::optional<std::string> get(const std::string& key) const;
  std::optional<double> number(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& out) const;
  void save(const std::string& path) const;
  static RunReport parse(std::istream& in, const std::string& source = "<stream>");
  static RunReport load(const std::string& path);

 private:
  std::string experiment_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct MetricDelta {
  std::string key;
  std::string a;
  std::string b;
  std::optional<double> delta;  // b - a for numeric entries
  bool exceeds = false;
};

struct Comparison {
  std::vector<MetricDelta> deltas;  // only entries that differ
  bool exceeded = false;
};

/// Entry-by-entry comparison. Numeric entries exceed when
/// |b - a| > abs_tol + rel_tol * max(|a|, |b|); differing text entries and
/// keys present in only one report always exceed.
Comparison compare(const RunReport& a, const RunReport& b, double abs_tol, double rel_tol = 0.0);

void write_comparison(std::ostream& out, const Comparison& c);

/// Shortest round-trip decimal text of a double.
std::string format_full(double value);
/// `digits` significant digits.
std::string format_sig(double value, int digits);

}  // namespace pilm

#endif  // PILM_REPORT_HPP
