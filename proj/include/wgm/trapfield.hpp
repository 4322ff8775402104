#pragma once

#include "wgm/angular.hpp"
#include "wgm/atomdata.hpp"
#include "wgm/stark.hpp"

#include <Eigen/Core>

#include <numbers>
#include <optional>
#include <vector>

/// Geometry of the surface-reflected trap beams and of the WGM. Frame: x is
/// the distance from the resonator surface (x > 0 outside the glass), z the
/// resonator axis, y completes the right-handed set. The beams travel in the
/// x-z plane at angle theta to the surface normal, so y-polarized light is
/// s-polarized and z'-polarized light is p-polarized.
namespace wgm::trapfield {

using Vec3 = Eigen::Vector3d;

enum class PolAxis { y, zprime, custom };
enum class Polarization { s, p };

struct BeamGeometry {
  double power = 0.0;      // W
  double waist = 3.5e-6;   // m
  double wavelength = 0.0; // m
  double theta = 0.0;      // rad, incidence angle
  double refractive_index = 1.45;
  PolAxis pol_axis = PolAxis::y;
  std::optional<Eigen::Vector3cd> custom_pol; // lab-frame vector for PolAxis::custom
  double focus_offset = 0.0; // m, focus displacement along the beam
  double reflection_phase = std::numbers::pi;

  double omega() const;
  /// Amplitude reflection coefficient for this beam's polarization.
  double reflection() const;
  /// Interference contrast factor: 1 for s, cos(2 theta) for p.
  double contrast() const;
  /// Unit polarization in the lab frame; z' = (sin theta, 0, cos theta).
  Eigen::Vector3cd lab_polarization() const;
};

/// Rotation taking a lab-frame quantization axis onto the atom-frame z axis.
/// All fields acting on one atom must share a frame.
class QuantizationFrame {
public:
  explicit QuantizationFrame(const Vec3 &axis);
  /// Axis along the dominant component of the beam's lab polarization.
  static QuantizationFrame along(const BeamGeometry &beam);

  angular::PolVector to_atom(const Eigen::Vector3cd &lab) const;
  const Eigen::Matrix3d &rotation() const { return R_; }

private:
  Eigen::Matrix3d R_;
};

/// Planar-interface Fresnel amplitude coefficient from vacuum onto index n.
double fresnel_reflection(Polarization pol, double theta, double n);

/// f_refl(x) = 1 + r^2 + 2 |r| c cos(2 k x cos(theta) + phi).
double reflection_factor(const BeamGeometry &beam, double x);
double reflection_factor_derivative(const BeamGeometry &beam, double x);

/// Peak intensity 2P/(pi w^2) of the incident beam at the atom plane.
double peak_intensity(const BeamGeometry &beam);
double field_intensity(const BeamGeometry &beam, const Vec3 &r);
Vec3 field_intensity_gradient(const BeamGeometry &beam, const Vec3 &r);

/// x of the first standing-wave antinode, lambda/(4 cos theta) for phi = pi.
double antinode_position(const BeamGeometry &beam);

/// Conservative potential for a point mass, zero at infinity.
class Potential {
public:
  virtual ~Potential() = default;
  virtual double value(const Vec3 &r) const = 0;
  virtual Vec3 gradient(const Vec3 &r) const = 0;
  virtual double mass() const = 0;
  virtual Vec3 minimum() const = 0;
  /// Energy above the minimum needed to leave the well.
  virtual double depth() const = 0;
  /// Trajectories leaving this box are flagged as escaped.
  virtual bool inside(const Vec3 &r) const = 0;
};

/// U = sum_i m w_i^2 (r_i - c_i)^2 / 2 - depth, truncated where the harmonic
/// part reaches `depth`.
class HarmonicPotential : public Potential {
public:
  HarmonicPotential(double mass, const Vec3 &omega, double depth, const Vec3 &center = Vec3::Zero());
  double value(const Vec3 &r) const override;
  Vec3 gradient(const Vec3 &r) const override;
  double mass() const override { return mass_; }
  Vec3 minimum() const override { return center_; }
  double depth() const override { return depth_; }
  bool inside(const Vec3 &r) const override;

private:
  double mass_;
  Vec3 omega_;
  double depth_;
  Vec3 center_;
};

/// Ground-state potential of the trap beams plus an optional -C3/x^3 term.
class TrapPotential : public Potential {
public:
  TrapPotential(const atomdata::SpeciesData &species, std::vector<BeamGeometry> beams, bool surface_term = false);

  double value(const Vec3 &r) const override;
  Vec3 gradient(const Vec3 &r) const override;
  double mass() const override { return mass_; }
  const std::vector<BeamGeometry> &beams() const { return beams_; }
  double c3() const { return c3_; }
  /// Minimum on the beam axis near the first antinode (cached).
  Vec3 minimum() const override { return minimum_; }
  /// min(inner barrier, outer barrier, transverse escape) - U(minimum).
  double depth() const override { return depth_; }
  bool inside(const Vec3 &r) const override;
  /// Atoms closer than this to the surface are counted as lost.
  double inner_limit() const { return inner_limit_; }

private:
  Vec3 find_minimum() const;
  double find_depth() const;

  std::vector<BeamGeometry> beams_;
  std::vector<double> coeff_; // potential per unit intensity, J m^2/W
  double c3_ = 0.0;
  double mass_ = 0.0;
  double inner_limit_ = 5e-9;
  Vec3 minimum_;
  double depth_ = 0.0;
};

/// (omega_x, omega_y, omega_z) from second derivatives of U at r0. Throws
/// Error(domain) when a curvature is negative.
Vec3 trap_frequencies(const Potential &U, const Vec3 &r0);

enum class DecayModel { bulk_index, effective_index };

struct ResonatorGeometry {
  double radius = 18.0e-6;
  double axial_curvature = 0.014e6; // 1/m
  double refractive_index = 1.45;
  double wavelength = 780.241e-9; // mode vacuum wavelength
  double g_max = 0.0;             // rad/s at the surface on the caustic
  double axial_extent = 15e-6;    // caustic to caustic
  DecayModel decay = DecayModel::effective_index;
  std::optional<double> decay_length_override;

  /// Radial 1/e decay length of g.
  double decay_length() const;
  /// n_eff = nu/(k0 R) of the fundamental TM mode from the asymptotic
  /// resonance condition.
  double effective_index() const;
  /// 1/e half width of the Gaussian axial envelope, extent/4.
  double axial_width() const { return axial_extent / 4.0; }
};

/// g(r) = g_max exp(-x/Lambda) exp(-(z/z_w)^2); unity azimuthal factor.
double coupling_strength(const ResonatorGeometry &res, const Vec3 &r);

/// FieldSpec of one beam at point r, for the Stark module.
stark::FieldSpec field_at(const BeamGeometry &beam, const Vec3 &r, const QuantizationFrame &frame);

} // namespace wgm::trapfield
