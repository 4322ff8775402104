#pragma once

#include <numbers>

// CODATA 2018 exact and recommended values. Every physical constant used by the
// library is taken from here.
namespace wgm::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double planck = 6.62607015e-34;               // J s
inline constexpr double hbar = planck / two_pi;                // J s
inline constexpr double speed_of_light = 299792458.0;          // m/s
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
inline constexpr double boltzmann = 1.380649e-23;              // J/K
inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double bohr_radius = 5.29177210903e-11;       // m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg

/// e * a0, the atomic unit of electric dipole moment.
inline constexpr double ea0 = elementary_charge * bohr_radius;

} // namespace wgm::constants
