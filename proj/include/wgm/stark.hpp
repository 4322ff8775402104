#pragma once

#include "wgm/angular.hpp"
#include "wgm/atomdata.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wgm::stark {

using angular::PolVector;
using atomdata::SpeciesData;

/// Rejects light closer than `min_detuning` to any line, except lines named in
/// `allowed_lines` (a near-resonant driver such as the compensation field).
struct PoleGuard {
  double min_detuning = 2.0 * 3.14159265358979323846 * 10e9; // rad/s
  std::vector<std::string> allowed_lines;
};

struct FieldSpec {
  double omega = 0.0;     // rad/s
  double intensity = 0.0; // W/m^2 at the atom
  PolVector pol = PolVector::z();
  std::string label;
  PoleGuard guard;

  /// Squared field amplitude E^2 = 2 I/(eps0 c). The only place the
  /// intensity/amplitude convention lives.
  double amplitude_squared() const;
  static double intensity_from_amplitude(double amplitude);
};

struct HfsState {
  HalfInt F;
  HalfInt M;
  auto operator<=>(const HfsState &) const = default;
  std::string str() const;
};

/// |J-I| <= F <= J+I ascending, M ascending within F.
std::vector<HfsState> hfs_basis(HalfInt J, HalfInt I);

/// alpha^(K) of one fine level at angular frequency omega, SI (C m^2/V).
/// Throws Error(resonance) when omega sits inside the guard of a line.
double reduced_polarizability(const SpeciesData &species, const std::string &level, int K, double omega,
                              const PoleGuard &guard = {});

/// Stark operator over hfs_basis(level), in rad/s (energy / hbar).
Eigen::MatrixXcd stark_matrix(const SpeciesData &species, const std::string &level, const FieldSpec &field);

/// Diagonal hfs energies over hfs_basis(level), rad/s.
Eigen::MatrixXcd hfs_matrix(const SpeciesData &species, const std::string &level);

/// hfs energy of one F, rad/s.
double hfs_energy(const SpeciesData &species, const std::string &level, HalfInt F);

/// Eigen-decomposed light shifts of one fine level. Column/entry i belongs to
/// basis[i]; labels come from maximum overlap with the reference vectors.
struct ShiftTable {
  std::string level;
  std::vector<HfsState> basis;
  Eigen::VectorXd eigenvalues; // rad/s, includes the hfs energy
  Eigen::MatrixXcd eigenvectors;
  Eigen::VectorXd bare_hfs; // rad/s
  int ambiguous_labels = 0; // assignments with overlap below 1/2

  std::size_t index(const HfsState &s) const;
  double total(const HfsState &s) const { return eigenvalues[static_cast<Eigen::Index>(index(s))]; }
  /// Light shift alone: eigenvalue minus bare hfs energy.
  double shift(const HfsState &s) const;
};

/// Diagonalizes V_hfs + sum of Stark operators. `reference` (from a previous
/// grid point) enables adiabatic label following; default is the bare basis.
ShiftTable diagonalize_interaction(const SpeciesData &species, const std::string &level,
                                   const std::vector<FieldSpec> &fields,
                                   const Eigen::MatrixXcd *reference = nullptr);

/// H = V_hfs + sum_i s_i V_i with V_i the Stark operator of field i at its
/// given intensity. Stark operators are linear in intensity, so spatial and
/// power scans only rescale precomputed matrices.
class InteractionModel {
public:
  InteractionModel(const SpeciesData &species, const std::string &level, const std::vector<FieldSpec> &fields);

  /// Diagonalizes with field i scaled by scale[i].
  ShiftTable at(const std::vector<double> &scale, const Eigen::MatrixXcd *reference = nullptr) const;
  const std::vector<HfsState> &basis() const { return basis_; }

private:
  std::string level_;
  std::vector<HfsState> basis_;
  Eigen::MatrixXcd hfs_;
  std::vector<Eigen::MatrixXcd> fields_;
};

/// Labels an already assembled Hamiltonian (rad/s) over `basis`.
ShiftTable diagonalize_matrix(const std::string &level, const std::vector<HfsState> &basis,
                              const Eigen::MatrixXcd &H, const Eigen::VectorXd &bare_hfs,
                              const Eigen::MatrixXcd *reference = nullptr);

/// Eigenvectors obtained by ramping all field intensities from zero to their
/// given values in `steps` increments, following labels from the bare basis.
Eigen::MatrixXcd adiabatic_reference(const SpeciesData &species, const std::string &level,
                                     const std::vector<FieldSpec> &fields, int steps = 32);

/// Light shift of each ground hfs state, rad/s. For linear polarization all
/// entries of one F coincide.
struct GroundShift {
  std::vector<HfsState> states;
  std::vector<double> shifts;
  bool scalar = true; // true when all shifts agree within 1e-9 relative
  double value() const { return shifts.front(); }
};
GroundShift ground_shift(const SpeciesData &species, const std::vector<FieldSpec> &fields);

struct TransitionDetuning {
  HfsState ground;
  HfsState excited;
  double detuning = 0.0; // rad/s relative to the bare F -> F_ref' line
};

/// delta_omega = delta_tot(F',M') - delta_hfs(F_ref') - delta_g(F,M) for every
/// dipole-allowed (F_ground, M) -> (F', M') pair.
std::vector<TransitionDetuning> transition_detunings(const SpeciesData &species, const ShiftTable &ground,
                                                     const ShiftTable &excited, HalfInt F_ground,
                                                     HalfInt F_ref);

struct ScanPoint {
  double P_c = 0.0; // W
  ShiftTable ground;
  ShiftTable excited;
  std::vector<TransitionDetuning> detunings;
};

struct ScanSetup {
  std::string excited_level = "5P3/2";
  HalfInt F_ground = HalfInt::from_int(3);
  HalfInt F_ref = HalfInt::from_int(4);
  /// Fields acting at the atom for compensation power P_c.
  std::function<std::vector<FieldSpec>(double P_c)> fields;
};

/// Detunings along a monotone P_c grid with adiabatic label following.
std::vector<ScanPoint> compensation_scan(const SpeciesData &species, const ScanSetup &setup,
                                         const std::vector<double> &P_c_grid);

/// CSV with columns P_c_uW,F,M,Fprime,Mprime,detuning_MHz.
std::string scan_csv(const std::vector<ScanPoint> &scan);

/// Linear zero crossing of the detuning of one transition along a scan.
std::optional<double> zero_crossing(const std::vector<ScanPoint> &scan, const HfsState &ground,
                                    const HfsState &excited);

struct TensorMinimum {
  double P_c = 0.0;
  double spread = 0.0;   // max - min light shift within the F' manifold, rad/s
  double detuning = 0.0; // mean detuning of the F -> F' lines there, rad/s
};

/// Grid point where the excited F' manifold is least split by the fields.
std::optional<TensorMinimum> tensor_minimum(const std::vector<ScanPoint> &scan, HalfInt F_excited);

} // namespace wgm::stark
