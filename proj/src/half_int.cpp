#include "wgm/half_int.hpp"

#include <charconv>
#include <cmath>

namespace wgm {

std::string HalfInt::str() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<int> parse_int(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

} // namespace

std::optional<HalfInt> HalfInt::parse(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = parse_int(trim(text.substr(0, slash)));
    const auto den = parse_int(trim(text.substr(slash + 1)));
    if (!num || !den) return std::nullopt;
    if (*den == 1) return from_int(*num);
    if (*den == 2) return from_twice(*num);
    return std::nullopt;
  }
  if (const auto i = parse_int(text)) return from_int(*i);
  // decimal form, e.g. "2.5"
  try {
    std::size_t used = 0;
    const double d = std::stod(std::string(text), &used);
    if (used != text.size()) return std::nullopt;
    const double twice = 2.0 * d;
    const double rounded = std::round(twice);
    if (std::abs(twice - rounded) > 1e-12) return std::nullopt;
    return from_twice(static_cast<int>(rounded));
  } catch (const std::exception &) {
    return std::nullopt;
  }
}

} // namespace wgm
