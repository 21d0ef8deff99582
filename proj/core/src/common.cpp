#include "transition_lens/common.hpp"

#include <algorithm>
#include <cctype>

namespace tlens {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(Carrier c) {
  switch (c) {
    case Carrier::Electricity:
      return "electricity";
    case Carrier::Gas:
      return "gas";
    case Carrier::Oil:
      return "oil";
  }
  return "?";
}

Carrier parse_carrier(std::string_view text) {
  const auto t = lower(text);
  if (t == "electricity") return Carrier::Electricity;
  if (t == "gas") return Carrier::Gas;
  if (t == "oil") return Carrier::Oil;
  throw InputError("unknown carrier '" + std::string(text) + "'");
}

std::string_view to_string(Semester s) { return s == Semester::H1 ? "H1" : "H2"; }

Semester parse_semester(std::string_view text) {
  const auto t = lower(text);
  if (t == "h1" || t == "1") return Semester::H1;
  if (t == "h2" || t == "2") return Semester::H2;
  throw InputError("unknown semester '" + std::string(text) + "'");
}

std::vector<int> YearWindow::years() const {
  std::vector<int> out;
  for (int y = first; y <= last; ++y) out.push_back(y);
  return out;
}

void Diagnostics::warn(const std::string& code, std::string message) {
  ++counters_[code];
  ++warnings_;
  if (messages_.size() < kMaxMessages) messages_.push_back(code + ": " + std::move(message));
}

std::size_t Diagnostics::counter(const std::string& code) const {
  const auto it = counters_.find(code);
  return it == counters_.end() ? 0 : it->second;
}

void Diagnostics::merge(const Diagnostics& other) {
  for (const auto& [code, n] : other.counters_) counters_[code] += n;
  warnings_ += other.warnings_;
  for (const auto& m : other.messages_) {
    if (messages_.size() >= kMaxMessages) break;
    messages_.push_back(m);
  }
}

}  // namespace tlens
