#pragma once

#include "dssl/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dssl {

/// Reads a time-major CSV one row at a time (rows = time steps, columns = channels).
///
/// The first non-blank line is treated as a header when any of its fields is not a number.
/// Every data row must be finite and as wide as the first one. Violations throw InputError
/// naming the offending line.
class CsvRowReader {
 public:
  explicit CsvRowReader(std::istream& in) : in_(in) {}

  /// Next data row, or false at end of input.
  bool next(std::vector<double>& row);

  std::size_t line_number() const { return line_; }
  std::optional<std::size_t> width() const { return width_; }
  const std::vector<std::string>& header() const { return header_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::optional<std::size_t> width_;
  std::vector<std::string> header_;
  bool first_ = true;
};

/// Splits on commas and parses each field as a double. Returns nullopt if any field is not
/// a number.
std::optional<std::vector<double>> parse_numeric_row(std::string_view line);

Matrix read_csv(std::istream& in);

/// 17 significant digits. With `header`, the first line is c1,...,cp.
void write_csv(std::ostream& out, const Matrix& samples, bool header = true);

}  // namespace dssl
