#ifndef CFKIT_REPORT_HPP_
#define CFKIT_REPORT_HPP_

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace cfkit {

/// Ordered metric-name -> value map plus the configuration that produced it.
/// Serializes to a flat key=value block or a CSV row with columns in
/// insertion order.
class EvaluationReport {
 public:
  void set_info(const std::string& key, const std::string& value);
  void set_value(const std::string& key, double value);

  const std::vector<std::pair<std::string, std::string>>& info() const { return info_; }
  const std::vector<std::pair<std::string, double>>& values() const { return values_; }
  double value(const std::string& key) const;  // DomainError when absent

  void write_kv(std::ostream& out) const;
  void write_csv_header(std::ostream& out) const;
  void write_csv_row(std::ostream& out) const;

 private:
  std::vector<std::pair<std::string, std::string>> info_;
  std::vector<std::pair<std::string, double>> values_;
};

/// RFC-4180 style quoting: fields with commas, quotes or newlines get
/// wrapped, embedded quotes double.
std::string csv_escape(const std::string& field);

}  // namespace cfkit

#endif  // CFKIT_REPORT_HPP_
