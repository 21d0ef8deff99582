#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace tlens::csv {

/// Parsed delimited-text table with a header row. Cells are kept as text;
/// numeric accessors parse on demand with locale-independent conversion.
class Table {
 public:
  static Table read(const std::filesystem::path& path);
  static Table parse(std::string_view text, std::string source);

  [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
  [[nodiscard]] std::size_t rows() const { return rows_.size(); }
  [[nodiscard]] const std::string& source() const { return source_; }

  /// Index of a required column; throws SchemaError naming the column.
  [[nodiscard]] std::size_t column(std::string_view name) const;
  [[nodiscard]] std::optional<std::size_t> find_column(std::string_view name) const;

  [[nodiscard]] std::string_view cell(std::size_t row, std::size_t col) const;
  [[nodiscard]] double number(std::size_t row, std::size_t col) const;
  [[nodiscard]] std::optional<double> optional_number(std::size_t row, std::size_t col) const;
  [[nodiscard]] int integer(std::size_t row, std::size_t col) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

double parse_double(std::string_view text);
int parse_int(std::string_view text);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);
std::string format_fixed(double value, int digits);

class Writer {
 public:
  Writer(const std::filesystem::path& path, const std::vector<std::string>& header);

  Writer& operator<<(std::string_view cell);
  Writer& operator<<(double value);
  Writer& operator<<(int value);
  Writer& operator<<(long long value);
  Writer& operator<<(std::size_t value);
  Writer& operator<<(bool value);
  void end_row();

 private:
  void separator();

  std::ofstream out_;
  std::ostringstream row_;
  std::filesystem::path path_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

}  // namespace tlens::csv
