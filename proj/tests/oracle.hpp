#pragma once

// Floating-point Racah formulas, written independently of the library's exact
// rational evaluation, for cross-checks at small j.

#include <algorithm>
#include <cmath>
#include <string>

namespace oracle {

inline long double fact(int n) { return n < 0 ? NAN : std::tgamma(static_cast<long double>(n) + 1); }

inline bool tri2(int a, int b, int c) { return (a + b + c) % 2 == 0 && c >= std::abs(a - b) && c <= a + b; }

inline long double delta2(int a, int b, int c) {
  return fact((a + b - c) / 2) * fact((a - b + c) / 2) * fact((-a + b + c) / 2) / fact((a + b + c) / 2 + 1);
}

// Arguments are doubled.
inline double w3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0 || !tri2(j1, j2, j3)) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
  if ((j1 + m1) % 2 || (j2 + m2) % 2 || (j3 + m3) % 2) return 0.0;
  const long double pre = std::sqrt(delta2(j1, j2, j3) * fact((j1 + m1) / 2) * fact((j1 - m1) / 2) *
                                    fact((j2 + m2) / 2) * fact((j2 - m2) / 2) * fact((j3 + m3) / 2) *
                                    fact((j3 - m3) / 2));
  long double sum = 0;
  for (int t = 0; t <= 200; ++t) {
    const int a[] = {t, (j3 - j2 + m1) / 2 + t, (j3 - j1 - m2) / 2 + t, (j1 + j2 - j3) / 2 - t, (j1 - m1) / 2 - t,
                     (j2 + m2) / 2 - t};
    if (*std::min_element(a, a + 6) < 0) continue;
    long double den = 1;
    for (int v : a) den *= fact(v);
    sum += (t % 2 ? -1.0L : 1.0L) / den;
  }
  const int phase = (j1 - j2 - m3) / 2;
  return static_cast<double>((phase % 2 ? -1.0L : 1.0L) * pre * sum);
}

inline double w6j(int a, int b, int c, int d, int e, int f) {
  if (!tri2(a, b, c) || !tri2(a, e, f) || !tri2(d, b, f) || !tri2(d, e, c)) return 0.0;
  const long double pre = std::sqrt(delta2(a, b, c) * delta2(a, e, f) * delta2(d, b, f) * delta2(d, e, c));
  long double sum = 0;
  for (int t = 0; t <= 200; ++t) {
    const int s[] = {t - (a + b + c) / 2, t - (a + e + f) / 2, t - (d + b + f) / 2, t - (d + e + c) / 2,
                     (a + b + d + e) / 2 - t, (b + c + e + f) / 2 - t, (a + c + d + f) / 2 - t};
    if (*std::min_element(s, s + 7) < 0) continue;
    long double den = 1;
    for (int v : s) den *= fact(v);
    sum += (t % 2 ? -1.0L : 1.0L) * fact(t + 1) / den;
  }
  return static_cast<double>(pre * sum);
}

// Two-level-plus toy species: J=1/2 ground, J=1/2 and J=3/2 excited, I = 3/2,
// no hyperfine splitting unless requested.
inline std::string toy_species_yaml(bool hfs) {
  std::string s = R"(species:
  name: toy
  nuclear_spin: 3/2
  mass: 87 u
  ground_level: 1S1/2
  saturation_intensity: 1 mW/cm^2
  dipole_decay_rate: 3 MHz
level:
  1S1/2: {n: 2, L: 0, J: 1/2, energy: 0 rad/s}
  1P1/2: {n: 2, L: 1, J: 1/2, energy: 370 THz}
  1P3/2: {n: 2, L: 1, J: 3/2, energy: 380 THz}
line:
  a: {lower: 1S1/2, upper: 1P1/2, reduced_dipole: 4 ea0}
  b: {lower: 1S1/2, upper: 1P3/2, reduced_dipole: 6 ea0}
)";
  if (hfs) s += "hfs:\n  1S1/2: {A: 1 GHz}\n  1P3/2: {A: 25 MHz, B: 25 MHz}\n";
  return s;
}

} // namespace oracle
