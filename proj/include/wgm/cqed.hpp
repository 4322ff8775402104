#pragma once

#include "wgm/dynamics.hpp"
#include "wgm/stark.hpp"
#include "wgm/trapfield.hpp"

#include <complex>
#include <string>
#include <vector>

namespace wgm::cqed {

/// Rates in rad/s (field amplitude decay rates).
struct CqedParams {
  double g = 0.0;
  double kappa0 = 0.0;
  double kappa_ext = 0.0;
  double gamma = 0.0;
  double Omega = 0.0;
  double Delta_al = 0.0;
  double Delta_rl = 0.0;

  double kappa_tot() const { return kappa0 + kappa_ext; }
  /// Throws Error(domain) for negative rates.
  void validate() const;
};

/// 2 kappa_ext |g Omega/2 / (g^2 + (gamma + i Delta_al)(kappa + i Delta_rl))|^2,
/// photons per second leaving through the fiber.
double fluorescence_output(const CqedParams &p);

/// Weak-drive fiber transmission.
double transmission(const CqedParams &p);

/// Complex transmitted amplitude a_out/a_in.
std::complex<double> transmission_amplitude(const CqedParams &p);

enum class Drive {
  fluorescence, // i (Omega/2)(sigma- - sigma+)
  transmission  // i sqrt(2 kappa_ext) eps (a - a^dagger), eps^2 = input photon flux
};

struct SteadyState {
  std::complex<double> a;     // <a>
  std::complex<double> sigma; // <sigma->
  double photons = 0.0;       // <a^dagger a>
  double excited = 0.0;       // <sigma+ sigma->
  int n_max = 0;              // cutoff actually used
  /// |<a_out>|^2: 2 kappa_ext |<a>|^2 for the fluorescence drive,
  /// |eps + sqrt(2 kappa_ext) <a>|^2 / eps^2 (transmission) otherwise.
  double output = 0.0;
};

/// Steady state of the Jaynes-Cummings master equation on the truncated
/// two-level x Fock space. The cutoff doubles (up to 64) while the top Fock
/// level holds more than 1e-6 of the population; Error(cutoff) afterwards.
SteadyState steadystate_numeric(const CqedParams &p, Drive drive, int n_max = 5, double input_amplitude = 0.0);

/// One occupied histogram bin.
struct Site {
  trapfield::Vec3 r;
  double weight = 0.0;
};

std::vector<Site> occupied_sites(const dynamics::PositionHistogram &h);

/// Everything needed to evaluate position-averaged spectra.
struct SpectrumSetup {
  const atomdata::SpeciesData *species = nullptr;
  std::string excited_level = "5P3/2";
  trapfield::BeamGeometry trap;
  trapfield::BeamGeometry compensation; // power ignored, set by the scan
  /// Lines the compensation light may sit close to.
  std::vector<std::string> compensation_lines{"5P3/2-5D5/2"};
  trapfield::BeamGeometry probe;        // power ignored, see probe_saturation
  double probe_saturation = 2.0;        // I_probe / I_sat at the trap minimum
  bool surface_term = false;
  trapfield::ResonatorGeometry resonator;
  double kappa0 = 0.0;
  double kappa_ext = 0.0;
  double Delta_rl_fluorescence = 0.0;
  /// Population of ground Zeeman states M = -F..F; empty means uniform.
  std::vector<double> ground_population;
  int jobs = 1;
};

struct CurveMetrics {
  double peak_x = 0.0;
  double peak_value = 0.0;
  double fwhm = 0.0; // 0 when a half-maximum crossing is missing
};

CurveMetrics peak_metrics(const std::vector<double> &x, const std::vector<double> &y);

struct FluorescenceSpectrum {
  std::vector<double> P_c;   // W
  std::vector<double> value; // photons/s through the fiber
  CurveMetrics metrics;
};

/// Fluorescence vs compensation power averaged over the 21 F=3 -> F'=4 Zeeman
/// lines (line-strength weights) and over `sites`.
FluorescenceSpectrum averaged_fluorescence_spectrum(const SpectrumSetup &setup, const std::vector<Site> &sites,
                                                    const std::vector<double> &P_c_grid);

struct TransmissionSpectrum {
  double P_c = 0.0;
  std::vector<double> detuning; // rad/s (Delta omega = Delta_rl)
  std::vector<double> T;
  double asymmetry = 0.0;       // integral of |T(D) - T(-D)| dD over D > 0, rad/s
  std::vector<double> minima;   // detunings of local minima, ascending
};

struct TransmissionScan {
  std::vector<TransmissionSpectrum> spectra; // one per P_c
  std::size_t best = 0;                      // index of the most symmetric spectrum
};

/// Cycling-transition transmission spectra for each P_c, averaged over sites.
/// The detuning grid must be symmetric about zero.
TransmissionScan averaged_transmission_scan(const SpectrumSetup &setup, const std::vector<Site> &sites,
                                            const std::vector<double> &P_c_grid,
                                            const std::vector<double> &detuning_grid);

/// Integral of |T(D) - T(-D)| over D > 0 on a symmetric grid.
double asymmetry(const std::vector<double> &detuning, const std::vector<double> &T);

/// Local minima of a sampled curve, parabola-refined.
std::vector<double> local_minima(const std::vector<double> &x, const std::vector<double> &y);

struct CouplingStats {
  double mean = 0.0; // rad/s
  double std = 0.0;  // rad/s
};

CouplingStats coupling_statistics(const trapfield::ResonatorGeometry &res, const std::vector<Site> &sites);

} // namespace wgm::cqed
