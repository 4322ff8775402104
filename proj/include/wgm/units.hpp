#pragma once

#include <string>
#include <string_view>

namespace wgm::units {

/// Physical dimension expected for a numeric entry. Each dimension has a fixed
/// SI target unit and a table of accepted input units.
enum class Dimension {
  dimensionless,
  length,            // m
  power,             // W
  intensity,         // W/m^2
  angular_frequency, // rad/s; Hz-family inputs are cyclic and get a factor 2*pi
  cyclic_frequency,  // Hz
  dipole,            // C*m
  mass,              // kg
  angle,             // rad
  time,              // s
  temperature,       // K
  c3,                // J*m^3
};

const char *si_unit(Dimension d) noexcept;

/// Parses "<number> <unit>" into SI. Throws wgm::Error (parse) naming `path`
/// when the number is malformed, the unit is missing, or the unit does not
/// belong to `d`. Dimensionless quantities may omit the unit.
double parse_quantity(std::string_view text, Dimension d, std::string_view path);

/// Formats an SI value with its SI unit using round-trip precision.
std::string format_si(double value, Dimension d);

} // namespace wgm::units
