#pragma once

#include <compare>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

namespace wgm {

/// Integer or half-integer quantum number stored as twice its value, so all
/// selection-rule arithmetic stays exact.
class HalfInt {
public:
  constexpr HalfInt() = default;

  static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }
  static constexpr HalfInt from_int(int value) { return HalfInt(2 * value); }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }
  /// Multiplicity 2j+1 (only meaningful for j >= 0).
  constexpr int multiplicity() const { return twice_ + 1; }

  constexpr HalfInt operator-() const { return HalfInt(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return HalfInt(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return HalfInt(twice_ - o.twice_); }
  constexpr HalfInt abs() const { return HalfInt(twice_ < 0 ? -twice_ : twice_); }

  constexpr auto operator<=>(const HalfInt &) const = default;

  /// "5/2", "-1/2", "3".
  std::string str() const;

  /// Accepts "p/2", plain integers and decimals that are exact half-integers
  /// ("2.5"). Returns nullopt for anything else.
  static std::optional<HalfInt> parse(std::string_view text);

private:
  constexpr explicit HalfInt(int twice) : twice_(twice) {}
  int twice_ = 0;
};

/// (-1)^x for an integral HalfInt; behaviour for non-integral x is undefined.
constexpr int parity_sign(HalfInt x) {
  const int v = x.twice() / 2;
  return (v % 2 == 0) ? 1 : -1;
}

/// |a - b| <= c <= a + b and a + b + c integral.
constexpr bool triangle(HalfInt a, HalfInt b, HalfInt c) {
  const int s = a.twice() + b.twice() + c.twice();
  if (s % 2 != 0) return false;
  const int d = a.twice() - b.twice();
  return c.twice() >= (d < 0 ? -d : d) && c.twice() <= a.twice() + b.twice();
}

} // namespace wgm
