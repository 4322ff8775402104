#pragma once

#include "wgm/half_int.hpp"

#include <Eigen/Core>

#include <array>
#include <complex>

namespace wgm::angular {

using cplx = std::complex<double>;

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3). Evaluated exactly with rational
/// arithmetic and rounded once; selection-rule violations give 0.
double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3);

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}; 0 when any triad fails.
double wigner6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6);

/// Convenience overloads taking doubled integers.
double wigner3j_twice(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3);
double wigner6j_twice(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6);

/// Complex unit polarization vector in Cartesian components.
class PolVector {
public:
  /// Throws Error(domain) unless |u| = 1 within 1e-12.
  explicit PolVector(const Eigen::Vector3cd &u);
  /// Normalizes first; throws for the zero vector.
  static PolVector normalized(const Eigen::Vector3cd &u);

  static PolVector x() { return PolVector(Eigen::Vector3cd(1, 0, 0)); }
  static PolVector y() { return PolVector(Eigen::Vector3cd(0, 1, 0)); }
  static PolVector z() { return PolVector(Eigen::Vector3cd(0, 0, 1)); }

  const Eigen::Vector3cd &cartesian() const { return u_; }
  bool is_real_up_to_phase() const;

private:
  Eigen::Vector3cd u_;
};

/// (u_{-1}, u_0, u_{+1}) with u_{-1} = (u_x - i u_y)/sqrt2, u_0 = u_z,
/// u_{+1} = -(u_x + i u_y)/sqrt2. Index 0 of the array holds u_{-1}.
std::array<cplx, 3> spherical_components(const PolVector &u);

/// {u* (x) u}_{Kq}. Throws Error(domain) for |q| > K or K outside 0..2.
cplx compound_tensor(const PolVector &u, int K, int q);

} // namespace wgm::angular
