#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sparqlog::report {

// A rectangular table of pre-formatted cells.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void addRow(std::vector<std::string> row);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  size_t columnIndex(std::string_view name) const;

  // RFC 4180: CRLF line ends, fields with quotes, commas or line breaks are
  // quoted and inner quotes doubled.
  std::string toCsv() const;
  static Table fromCsv(std::string_view text);

  bool operator==(const Table&) const = default;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string csvField(std::string_view value);

// Fixed-point rendering; NaN renders empty and negative zero as zero.
std::string formatFixed(double value, int decimals);
// 100 * count / denominator with two decimals, empty for a zero denominator.
std::string percent(size_t count, size_t denominator);

}  // namespace sparqlog::report
