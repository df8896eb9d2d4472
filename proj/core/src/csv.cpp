#include "dssl/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

namespace dssl {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::optional<std::vector<double>> parse_numeric_row(std::string_view line) {
  std::vector<double> row;
  for (auto field : split(line)) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
    row.push_back(v);
  }
  return row;
}

bool CsvRowReader::next(std::vector<double>& row) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (trim(line).empty()) continue;
    auto parsed = parse_numeric_row(line);
    if (!parsed) {
      if (first_) {
        first_ = false;
        for (auto f : split(line)) header_.emplace_back(f);
        width_ = header_.size();
        continue;
      }
      throw InputError("line " + std::to_string(line_) + ": malformed row");
    }
    first_ = false;
    for (double v : *parsed)
      if (!std::isfinite(v)) throw InputError("line " + std::to_string(line_) + ": non-finite value");
    if (width_ && *width_ != parsed->size())
      throw InputError("line " + std::to_string(line_) + ": expected " + std::to_string(*width_) +
                       " columns, found " + std::to_string(parsed->size()));
    width_ = parsed->size();
    row = std::move(*parsed);
    return true;
  }
  return false;
}

Matrix read_csv(std::istream& in) {
  CsvRowReader reader(in);
  std::vector<std::vector<double>> rows;
  std::vector<double> row;
  while (reader.next(row)) rows.push_back(row);
  if (rows.empty()) return Matrix(0, static_cast<Eigen::Index>(reader.width().value_or(0)));
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t j = 0; j < rows[t].size(); ++j) m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
  return m;
}

void write_csv(std::ostream& out, const Matrix& samples, bool header) {
  if (header) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) out << (j ? "," : "") << 'c' << (j + 1);
    out << '\n';
  }
  const auto old = out.precision(17);
  for (Eigen::Index t = 0; t < samples.rows(); ++t) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) out << (j ? "," : "") << samples(t, j);
    out << '\n';
  }
  out.precision(old);
}

}  // namespace dssl
