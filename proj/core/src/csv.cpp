#include "transition_lens/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <system_error>

#include "transition_lens/common.hpp"

namespace tlens::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.emplace_back(trim(cur));
  return cells;
}

}  // namespace

Table Table::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

Table Table::parse(std::string_view text, std::string source) {
  Table t;
  t.source_ = std::move(source);
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  bool have_header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (!have_header) {
      t.header_ = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header_.size()) {
      throw SchemaError(t.source_, "",
                        t.source_ + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header_.size()) + " fields, found " +
                            std::to_string(cells.size()));
    }
    t.rows_.push_back(std::move(cells));
  }
  if (!have_header) throw SchemaError(t.source_, "", t.source_ + ": missing header row");
  return t;
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  return std::nullopt;
}

std::size_t Table::column(std::string_view name) const {
  if (auto i = find_column(name)) return *i;
  throw SchemaError(source_, std::string(name),
                    source_ + ": missing required column '" + std::string(name) + "'");
}

std::string_view Table::cell(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }

double Table::number(std::size_t row, std::size_t col) const {
  try {
    return parse_double(cell(row, col));
  } catch (const InputError& e) {
    throw SchemaError(source_, header_.at(col),
                      source_ + ": row " + std::to_string(row + 2) + ", column '" +
                          header_.at(col) + "': " + e.what());
  }
}

std::optional<double> Table::optional_number(std::size_t row, std::size_t col) const {
  const auto c = cell(row, col);
  if (c.empty() || c == "NA" || c == "na" || c == "null") return std::nullopt;
  return number(row, col);
}

int Table::integer(std::size_t row, std::size_t col) const {
  try {
    return parse_int(cell(row, col));
  } catch (const InputError& e) {
    throw SchemaError(source_, header_.at(col),
                      source_ + ": row " + std::to_string(row + 2) + ", column '" +
                          header_.at(col) + "': " + e.what());
  }
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty())
    throw InputError("not a number: '" + std::string(text) + "'");
  return value;
}

int parse_int(std::string_view text) {
  text = trim(text);
  int value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty())
    throw InputError("not an integer: '" + std::string(text) + "'");
  return value;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string format_fixed(double value, int digits) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, digits);
  return std::string(buf, ptr);
}

Writer::Writer(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), columns_(header.size()) {
  if (!out_) throw InputError("cannot write '" + path.string() + "'");
  for (const auto& h : header) *this << std::string_view(h);
  end_row();
}

void Writer::separator() {
  if (in_row_++ > 0) row_ << ',';
}

Writer& Writer::operator<<(std::string_view cell) {
  separator();
  if (cell.find_first_of(",\"\n") != std::string_view::npos) {
    row_ << '"';
    for (char c : cell) {
      if (c == '"') row_ << '"';
      row_ << c;
    }
    row_ << '"';
  } else {
    row_ << cell;
  }
  return *this;
}

Writer& Writer::operator<<(double value) { return *this << std::string_view(format_double(value)); }

Writer& Writer::operator<<(int value) {
  separator();
  row_ << value;
  return *this;
}

Writer& Writer::operator<<(long long value) {
  separator();
  row_ << value;
  return *this;
}

Writer& Writer::operator<<(std::size_t value) {
  separator();
  row_ << value;
  return *this;
}

Writer& Writer::operator<<(bool value) { return *this << std::string_view(value ? "1" : "0"); }

void Writer::end_row() {
  if (in_row_ != columns_) {
    const auto found = in_row_;
    row_.str({});
    in_row_ = 0;
    throw Error(path_.string() + ": row has " + std::to_string(found) + " cells, expected " +
                std::to_string(columns_));
  }
  row_ << '\n';
  out_ << row_.str();
  row_.str({});
  in_row_ = 0;
}

}  // namespace tlens::csv
