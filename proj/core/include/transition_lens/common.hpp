#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tlens {

using FirmId = std::string;

enum class Carrier { Electricity = 0, Gas = 1, Oil = 2 };

inline constexpr std::array<Carrier, 3> kCarriers{Carrier::Electricity, Carrier::Gas,
                                                  Carrier::Oil};

constexpr std::size_t index(Carrier c) { return static_cast<std::size_t>(c); }
std::string_view to_string(Carrier c);
Carrier parse_carrier(std::string_view text);

enum class Semester { H1 = 1, H2 = 2 };

std::string_view to_string(Semester s);
Semester parse_semester(std::string_view text);

struct Period {
  int year = 0;
  Semester semester = Semester::H1;

  auto operator<=>(const Period&) const = default;
};

/// Inclusive range of calendar years.
struct YearWindow {
  int first = 2020;
  int last = 2024;

  [[nodiscard]] bool contains(int year) const { return year >= first && year <= last; }
  [[nodiscard]] int size() const { return last >= first ? last - first + 1 : 0; }
  [[nodiscard]] bool empty() const { return size() == 0; }
  [[nodiscard]] std::vector<int> years() const;
};

// Error hierarchy. The CLI maps InputError/SchemaError to exit 2 and
// FitError/NumericalError to exit 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  SchemaError(std::string file, std::string column, const std::string& what)
      : Error(what), file_(std::move(file)), column_(std::move(column)) {}
  [[nodiscard]] const std::string& file() const { return file_; }
  [[nodiscard]] const std::string& column() const { return column_; }

 private:
  std::string file_;
  std::string column_;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  NumericalError(std::string module, std::string context, const std::string& what)
      : Error(what), module_(std::move(module)), context_(std::move(context)) {}
  [[nodiscard]] const std::string& module() const { return module_; }
  [[nodiscard]] const std::string& context() const { return context_; }

 private:
  std::string module_;
  std::string context_;
};

/// Counted, non-fatal conditions collected while a stage runs.
class Diagnostics {
 public:
  void warn(const std::string& code, std::string message);
  void count(const std::string& code, std::size_t n = 1) { counters_[code] += n; }

  [[nodiscard]] const std::vector<std::string>& messages() const { return messages_; }
  [[nodiscard]] const std::map<std::string, std::size_t>& counters() const { return counters_; }
  [[nodiscard]] std::size_t warning_count() const { return warnings_; }
  [[nodiscard]] std::size_t counter(const std::string& code) const;

  void merge(const Diagnostics& other);

  // Caps the number of retained messages; counters are always exact.
  static constexpr std::size_t kMaxMessages = 200;

 private:
  std::vector<std::string> messages_;
  std::map<std::string, std::size_t> counters_;
  std::size_t warnings_ = 0;
};

}  // namespace tlens
