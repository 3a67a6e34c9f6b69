#include "pilm/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "pilm/error.hpp"

namespace pilm {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> to_number(const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    if (text == "nan") return std::nan("");
    if (text == "inf") return HUGE_VAL;
    if (text == "-inf") return -HUGE_VAL;
    return std::nullopt;
  }
  return v;
}

void check_key(const std::string& key) {
  if (key.empty() || key.find_first_of("=\n#") != std::string::npos || trim(key) != key)
    throw ConfigError("invalid report key '" + key + "'");
}

}  // namespace

std::string format_full(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string format_sig(double value, int digits) {
  if (!std::isfinite(value)) return format_full(value);
  std::ostringstream s;
  s.precision(digits);
  s << value;
  return s.str();
}

void RunReport::set(const std::string& key, const std::string& value) {
  check_key(key);
  if (key == "experiment") throw ConfigError("'experiment' is reserved");
  if (value.find('\n') != std::string::npos) throw ConfigError("report values must be single-line");
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void RunReport::set(const std::string& key, double value, int digits) { set(key, format_sig(value, digits)); }

void RunReport::set(const std::string& key, long long value) { set(key, std::to_string(value)); }

std::optional<std::string> RunReport::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

std::optional<double> RunReport::number(const std::string& key) const {
  const auto v = get(key);
  return v ? to_number(*v) : std::nullopt;
}

void RunReport::write(std::ostream& out) const {
  out << "experiment = " << experiment_ << '\n';
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

void RunReport::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report '" + path + "'");
  write(out);
}

RunReport RunReport::parse(std::istream& in, const std::string& source) {
  RunReport r;
  std::string line;
  std::size_t line_no = 0;
  bool have_experiment = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw DataError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (!have_experiment) {
      if (key != "experiment")
        throw DataError(source + ":" + std::to_string(line_no) + ": report must start with 'experiment = ...'");
      r.experiment_ = value;
      have_experiment = true;
      continue;
    }
    r.set(key, value);
  }
  if (!have_experiment) throw DataError(source + ": empty report");
  return r;
}

RunReport RunReport::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report '" + path + "'");
  return parse(in, path);
}

Comparison compare(const RunReport& a, const RunReport& b, double abs_tol, double rel_tol) {
  if (!(abs_tol >= 0.0) || !(rel_tol >= 0.0)) throw ConfigError("tolerances must be non-negative");
  if (a.experiment() != b.experiment())
    throw ConfigError("cannot compare a '" + a.experiment() + "' report with a '" + b.experiment() + "' report");
  Comparison c;
  std::vector<std::string> keys;
  for (const auto& e : a.entries()) keys.push_back(e.first);
  for (const auto& e : b.entries())
    if (!a.get(e.first)) keys.push_back(e.first);

  for (const auto& key : keys) {
    const auto va = a.get(key), vb = b.get(key);
    MetricDelta d{key, va.value_or("<missing>"), vb.value_or("<missing>"), std::nullopt, false};
    if (!va || !vb) {
      d.exceeds = true;
    } else {
      const auto na = to_number(*va), nb = to_number(*vb);
      if (na && nb) {
        if (*na == *nb || (std::isnan(*na) && std::isnan(*nb))) continue;
        d.delta = *nb - *na;
        const double bound = abs_tol + rel_tol * std::max(std::abs(*na), std::abs(*nb));
        d.exceeds = !(std::abs(*d.delta) <= bound);
      } else {
        if (*va == *vb) continue;
        d.exceeds = true;
      }
    }
    c.exceeded = c.exceeded || d.exceeds;
    c.deltas.push_back(std::move(d));
  }
  return c;
}

void write_comparison(std::ostream& out, const Comparison& c) {
  for (const auto& d : c.deltas) {
    out << d.key << ": " << d.a << " -> " << d.b;
    if (d.delta) out << " (delta " << format_sig(*d.delta, 6) << ")";
    if (d.exceeds) out << " EXCEEDS";
    out << '\n';
  }
  if (c.deltas.empty()) out << "no differences\n";
}

}  // namespace pilm
