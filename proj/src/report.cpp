#include "cfkit/report.hpp"

#include <cstdio>
#include <ostream>

#include "cfkit/errors.hpp"

namespace cfkit {

namespace {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void EvaluationReport::set_info(const std::string& key, const std::string& value) {
  for (auto& [k, v] : info_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  info_.emplace_back(key, value);
}

void EvaluationReport::set_value(const std::string& key, double value) {
  for (auto& [k, v] : values_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  values_.emplace_back(key, value);
}

double EvaluationReport::value(const std::string& key) const {
  for (const auto& [k, v] : values_)
    if (k == key) return v;
  throw DomainError("report has no value named " + key);
}

void EvaluationReport::write_kv(std::ostream& out) const {
  for (const auto& [k, v] : info_) out << k << " = " << v << '\n';
  for (const auto& [k, v] : values_) out << k << " = " << format_value(v) << '\n';
}

void EvaluationReport::write_csv_header(std::ostream& out) const {
  bool first = true;
  for (const auto& [k, v] : info_) {
    if (!first) out << ',';
    out << csv_escape(k);
    first = false;
  }
  for (const auto& [k, v] : values_) {
    if (!first) out << ',';
    out << csv_escape(k);
    first = false;
  }
  out << "\r\n";
}

void EvaluationReport::write_csv_row(std::ostream& out) const {
  bool first = true;
  for (const auto& [k, v] : info_) {
    if (!first) out << ',';
    out << csv_escape(v);
    first = false;
  }
  for (const auto& [k, v] : values_) {
    if (!first) out << ',';
    out << csv_escape(format_value(v));
    first = false;
  }
  out << "\r\n";
}

std::string csv_escape(const std::string& field) {
  bool needs_quote = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quote) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace cfkit
