#include "transition_lens/nace.hpp"

#include <cctype>
#include <vector>

#include "transition_lens/common.hpp"

namespace tlens {

namespace {

[[noreturn]] void malformed(std::string_view text) {
  throw InputError("malformed NACE code '" + std::string(text) + "'");
}

std::string strip_zeros(std::string_view digits) {
  while (digits.size() > 1 && digits.front() == '0') digits.remove_prefix(1);
  return std::string(digits);
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

NaceCode NaceCode::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  if (text.size() < 2 || !std::isalpha(static_cast<unsigned char>(text.front()))) malformed(text);

  const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(text.front())));
  const auto rest = text.substr(1);

  std::vector<std::string> groups;
  if (rest.find('.') != std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      const auto dot = rest.find('.', start);
      const auto part = rest.substr(start, dot == std::string_view::npos ? rest.npos : dot - start);
      if (!all_digits(part)) malformed(text);
      groups.push_back(std::string(part));
      if (dot == std::string_view::npos) break;
      start = dot + 1;
    }
    if (groups.size() > 3 || groups[0].size() > 2) malformed(text);
    for (std::size_t i = 1; i < groups.size(); ++i)
      if (groups[i].size() != 1) malformed(text);
  } else {
    if (!all_digits(rest) || rest.size() > 4) malformed(text);
    // Undotted: two-digit division, then one digit each for group and class.
    const auto div_len = rest.size() == 1 ? 1 : 2;
    groups.push_back(std::string(rest.substr(0, div_len)));
    for (std::size_t i = div_len; i < rest.size(); ++i) groups.push_back(std::string(1, rest[i]));
  }

  NaceCode code;
  code.dotted_.push_back(letter);
  code.dotted_ += strip_zeros(groups[0]);
  for (std::size_t i = 1; i < groups.size(); ++i) code.dotted_ += "." + groups[i];
  code.depth_ = static_cast<int>(groups.size());
  return code;
}

std::string NaceCode::division() const {
  const auto dot = dotted_.find('.');
  return dot == std::string::npos ? dotted_ : dotted_.substr(0, dot);
}

}  // namespace tlens
