#pragma once

#include "wgm/atomdata.hpp"
#include "wgm/dynamics.hpp"
#include "wgm/trapfield.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace wgm::cli {

struct PolSpec {
  trapfield::PolAxis axis = trapfield::PolAxis::y;
  std::optional<Eigen::Vector3cd> custom; // lab frame
};

struct Violation {
  std::string path;
  std::string message;
};

/// One experiment-specific beam setting.
struct BeamChoice {
  PolSpec pol;
  double waist_ratio = 1.0; // w_c / w_trap
};

struct ExperimentConfig {
  std::filesystem::path source; // config file, for relative paths
  std::filesystem::path species_path;
  std::string excited_level = "5P3/2";
  std::filesystem::path output_dir = "out";

  trapfield::BeamGeometry trap; // pol_axis from beams.trap.pol
  PolSpec trap_pol;
  std::string compensation_line = "5P3/2-5D5/2";
  double compensation_detuning = 0.0; // rad/s from the line, negative = red
  double probe_wavelength = 780.241e-9;
  double probe_saturation = 2.0;
  bool surface_term = true; // -C3/x^3 term

  trapfield::ResonatorGeometry resonator;
  double kappa0 = 0.0, kappa_ext = 0.0;

  BeamChoice scan_beams;
  std::vector<double> scan_powers; // W

  BeamChoice fluorescence_beams;
  std::vector<double> fluorescence_powers;
  double fluorescence_resonator_detuning = 0.0;

  BeamChoice transmission_beams;
  std::vector<double> transmission_powers;
  std::vector<double> transmission_detunings; // rad/s
  std::vector<double> transmission_extra_powers;

  dynamics::DistributionOptions monte_carlo;
  double energy_center = 2.0 / 3.0; // of U0
  double energy_width = 0.2;        // of U0

  dynamics::AdiabaticMapping mapping = dynamics::AdiabaticMapping::harmonic;
  std::vector<double> lowering_grid; // U_low/U0
};

/// Parses and collects every violated invariant instead of stopping at the
/// first one. `config` is only meaningful when the list is empty.
std::vector<Violation> load_config(const std::filesystem::path &path, ExperimentConfig &config);
std::vector<Violation> parse_config(const std::string &text, const std::filesystem::path &source,
                                    ExperimentConfig &config);

/// Beam with the polarization choice applied.
trapfield::BeamGeometry trap_beam(const ExperimentConfig &c, const PolSpec &pol);
/// Compensation beam (power 0) following `trap` in geometry and polarization.
trapfield::BeamGeometry compensation_beam(const ExperimentConfig &c, const atomdata::SpeciesData &species,
                                          const trapfield::BeamGeometry &trap, double waist_ratio);
trapfield::BeamGeometry probe_beam(const ExperimentConfig &c, const trapfield::BeamGeometry &trap);

} // namespace wgm::cli
