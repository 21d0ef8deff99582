#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace tlens {

/// NACE activity code in canonical dotted form, e.g. "D35.1.1".
///
/// Accepts dotted ("D35.1.1", "B06.1.0") and undotted ("D3511") spellings.
/// The division number is stored without leading zeros, so "B06.1.0" and
/// "B0610" both become "B6.1.0".
class NaceCode {
 public:
  /// Throws InputError for anything that is not a letter followed by up to
  /// three numeric groups.
  static NaceCode parse(std::string_view text);

  [[nodiscard]] const std::string& dotted() const { return dotted_; }
  [[nodiscard]] char section() const { return dotted_.front(); }
  /// Section letter plus division, e.g. "D35".
  [[nodiscard]] std::string division() const;
  [[nodiscard]] int depth() const { return depth_; }

  auto operator<=>(const NaceCode&) const = default;

 private:
  std::string dotted_;
  int depth_ = 0;
};

}  // namespace tlens
