#include "wgm/units.hpp"

#include "wgm/constants.hpp"
#include "wgm/error.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <utility>

namespace wgm::units {

namespace {

using namespace wgm::constants;

struct UnitEntry {
  Dimension dim;
  std::string_view symbol;
  double factor; // SI value of one input unit
};

// clang-format off
constexpr std::array kUnits{
  UnitEntry{Dimension::length, "m", 1.0},
  UnitEntry{Dimension::length, "mm", 1e-3},
  UnitEntry{Dimension::length, "um", 1e-6},
  UnitEntry{Dimension::length, "nm", 1e-9},

  UnitEntry{Dimension::power, "W", 1.0},
  UnitEntry{Dimension::power, "mW", 1e-3},
  UnitEntry{Dimension::power, "uW", 1e-6},

  UnitEntry{Dimension::intensity, "W/m^2", 1.0},
  UnitEntry{Dimension::intensity, "mW/cm^2", 10.0},
  UnitEntry{Dimension::intensity, "W/cm^2", 1e4},

  UnitEntry{Dimension::angular_frequency, "rad/s", 1.0},
  UnitEntry{Dimension::angular_frequency, "Hz", two_pi},
  UnitEntry{Dimension::angular_frequency, "kHz", two_pi * 1e3},
  UnitEntry{Dimension::angular_frequency, "MHz", two_pi * 1e6},
  UnitEntry{Dimension::angular_frequency, "GHz", two_pi * 1e9},
  UnitEntry{Dimension::angular_frequency, "THz", two_pi * 1e12},
  UnitEntry{Dimension::angular_frequency, "cm^-1", two_pi * speed_of_light * 100.0},

  UnitEntry{Dimension::cyclic_frequency, "Hz", 1.0},
  UnitEntry{Dimension::cyclic_frequency, "kHz", 1e3},
  UnitEntry{Dimension::cyclic_frequency, "MHz", 1e6},
  UnitEntry{Dimension::cyclic_frequency, "GHz", 1e9},

  UnitEntry{Dimension::dipole, "C*m", 1.0},
  UnitEntry{Dimension::dipole, "ea0", ea0},

  UnitEntry{Dimension::mass, "kg", 1.0},
  UnitEntry{Dimension::mass, "u", atomic_mass_unit},

  UnitEntry{Dimension::angle, "rad", 1.0},
  UnitEntry{Dimension::angle, "deg", pi / 180.0},

  UnitEntry{Dimension::time, "s", 1.0},
  UnitEntry{Dimension::time, "ms", 1e-3},
  UnitEntry{Dimension::time, "us", 1e-6},
  UnitEntry{Dimension::time, "ns", 1e-9},

  UnitEntry{Dimension::temperature, "K", 1.0},
  UnitEntry{Dimension::temperature, "mK", 1e-3},
  UnitEntry{Dimension::temperature, "uK", 1e-6},

  UnitEntry{Dimension::c3, "J*m^3", 1.0},
  UnitEntry{Dimension::c3, "h*kHz*um^3", planck * 1e3 * 1e-18},
};
// clang-format on

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::string_view path, const std::string &msg) {
  throw Error(ErrorKind::parse, std::string(path), msg);
}

} // namespace

const char *si_unit(Dimension d) noexcept {
  switch (d) {
  case Dimension::dimensionless: return "";
  case Dimension::length: return "m";
  case Dimension::power: return "W";
  case Dimension::intensity: return "W/m^2";
  case Dimension::angular_frequency: return "rad/s";
  case Dimension::cyclic_frequency: return "Hz";
  case Dimension::dipole: return "C*m";
  case Dimension::mass: return "kg";
  case Dimension::angle: return "rad";
  case Dimension::time: return "s";
  case Dimension::temperature: return "K";
  case Dimension::c3: return "J*m^3";
  }
  return "";
}

double parse_quantity(std::string_view text, Dimension d, std::string_view path) {
  text = trim(text);
  const auto space = text.find_first_of(" \t");
  const std::string_view number = text.substr(0, space);
  const std::string_view unit =
      space == std::string_view::npos ? std::string_view{} : trim(text.substr(space));

  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
  if (number.empty() || ec != std::errc() || ptr != number.data() + number.size())
    fail(path, "malformed number '" + std::string(number) + "'");

  if (d == Dimension::dimensionless) {
    if (!unit.empty()) fail(path, "unexpected unit '" + std::string(unit) + "' on dimensionless entry");
    return value;
  }
  if (unit.empty())
    fail(path, std::string("missing unit (expected a unit convertible to ") + si_unit(d) + ")");

  for (const auto &entry : kUnits)
    if (entry.dim == d && entry.symbol == unit) return value * entry.factor;
  fail(path, "unit '" + std::string(unit) + "' is not valid here (expected a unit convertible to " +
                 si_unit(d) + ")");
}

std::string format_si(double value, Dimension d) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", value);
  std::string out(buf, static_cast<std::size_t>(n));
  if (d != Dimension::dimensionless) {
    out += ' ';
    out += si_unit(d);
  }
  return out;
}

} // namespace wgm::units
