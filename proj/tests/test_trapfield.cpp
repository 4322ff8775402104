#include "doctest.h"

#include "wgm/atomdata.hpp"
#include "wgm/constants.hpp"
#include "wgm/error.hpp"
#include "wgm/trapfield.hpp"

#include <Eigen/LU>

#include <cmath>

using namespace wgm;
using constants::pi;
using constants::two_pi;
using trapfield::Vec3;

namespace {

const atomdata::SpeciesData &rb() {
  static const auto s = atomdata::load_species(WGM_DATA_DIR "/rb85.yaml");
  return s;
}

trapfield::BeamGeometry trap_beam(trapfield::PolAxis axis) {
  trapfield::BeamGeometry b;
  b.power = 18.7e-3;
  b.wavelength = 783.68e-9;
  b.theta = 17 * pi / 180;
  b.pol_axis = axis;
  return b;
}

} // namespace

TEST_CASE("Fresnel coefficients") {
  const double n = 1.45, th = 17 * pi / 180;
  const double ct = std::sqrt(1 - std::pow(std::sin(th) / n, 2));
  const double rs = (std::cos(th) - n * ct) / (std::cos(th) + n * ct);
  const double rp = (ct - n * std::cos(th)) / (ct + n * std::cos(th));
  CHECK(std::abs(trapfield::fresnel_reflection(trapfield::Polarization::s, th, n)) == doctest::Approx(std::abs(rs)).epsilon(1e-14));
  CHECK(std::abs(trapfield::fresnel_reflection(trapfield::Polarization::p, th, n)) == doctest::Approx(std::abs(rp)).epsilon(1e-14));
  CHECK(std::abs(trapfield::fresnel_reflection(trapfield::Polarization::s, 0, n)) == doctest::Approx(0.45 / 2.45));
}

TEST_CASE("standing-wave enhancement at the first antinode") {
  const auto y = trap_beam(trapfield::PolAxis::y), zp = trap_beam(trapfield::PolAxis::zprime);
  const double x0 = trapfield::antinode_position(y);
  CHECK(x0 == doctest::Approx(783.68e-9 / (4 * std::cos(17 * pi / 180))).epsilon(1e-14));
  const double r = y.reflection();
  CHECK(trapfield::reflection_factor(y, x0) == doctest::Approx(1 + r * r + 2 * std::abs(r)).epsilon(1e-14));
  // enhancement factors used for the light-shift estimates, 1.43 and 1.31
  CHECK(trapfield::reflection_factor(y, x0) == doctest::Approx(1.43).epsilon(0.01));
  CHECK(trapfield::reflection_factor(zp, x0) == doctest::Approx(1.31).epsilon(0.01));
  // p contrast is reduced by cos(2 theta)
  CHECK(zp.contrast() == doctest::Approx(std::cos(2 * 17 * pi / 180)));
  // node at the surface for a pi reflection phase
  CHECK(trapfield::reflection_factor(y, 0.0) == doctest::Approx(std::pow(1 - std::abs(r), 2)).epsilon(1e-12));
}

TEST_CASE("intensity and potential gradients match finite differences") {
  const auto b = trap_beam(trapfield::PolAxis::y);
  const trapfield::TrapPotential U(rb(), {b});
  for (const Vec3 r : {Vec3(150e-9, 0.3e-6, -0.4e-6), Vec3(260e-9, -1e-6, 0.5e-6), Vec3(205e-9, 0, 0)}) {
    const Vec3 gI = trapfield::field_intensity_gradient(b, r);
    const Vec3 gU = U.gradient(r);
    for (int k = 0; k < 3; ++k) {
      const double h = k == 0 ? 1e-11 : 1e-10;
      Vec3 e = Vec3::Zero();
      e[k] = h;
      const double dI = (trapfield::field_intensity(b, r + e) - trapfield::field_intensity(b, r - e)) / (2 * h);
      const double dU = (U.value(r + e) - U.value(r - e)) / (2 * h);
      CHECK(gI[k] == doctest::Approx(dI).epsilon(1e-5).scale(1e-6 * gI.norm()));
      CHECK(gU[k] == doctest::Approx(dU).epsilon(1e-5).scale(1e-6 * gU.norm()));
    }
  }
}

TEST_CASE("harmonic potential and trap frequencies") {
  const Vec3 w(two_pi * 1e6, two_pi * 60e3, two_pi * 55e3);
  const trapfield::HarmonicPotential U(1e-25, w, 1e-26, Vec3(200e-9, 0, 0));
  CHECK(U.value(U.minimum()) == doctest::Approx(-1e-26));
  CHECK(U.inside(U.minimum()));
  const Vec3 f = trapfield::trap_frequencies(U, U.minimum());
  for (int k = 0; k < 3; ++k) CHECK(f[k] == doctest::Approx(w[k]).epsilon(1e-6));
  // negative curvature is rejected
  const trapfield::TrapPotential T(rb(), {trap_beam(trapfield::PolAxis::y)});
  CHECK_THROWS_AS(trapfield::trap_frequencies(T, Vec3(trapfield::antinode_position(trap_beam(trapfield::PolAxis::y)) + 205e-9, 0, 0)), Error);
}

TEST_CASE("trap minimum sits near the antinode, pulled in by the surface") {
  const auto b = trap_beam(trapfield::PolAxis::y);
  const trapfield::TrapPotential with(rb(), {b}, true), without(rb(), {b}, false);
  CHECK(without.minimum().x() == doctest::Approx(trapfield::antinode_position(b)).epsilon(1e-6));
  CHECK(with.minimum().x() < without.minimum().x());
  CHECK(with.minimum().x() > 190e-9);
  CHECK(with.gradient(with.minimum()).norm() < 1e-6 * with.gradient(Vec3(150e-9, 0, 0)).norm());
  CHECK(with.depth() > 0);
  CHECK(with.depth() < without.depth());
}

TEST_CASE("quantization frame maps the dominant polarization onto z") {
  auto b = trap_beam(trapfield::PolAxis::custom);
  b.custom_pol = Eigen::Vector3cd(0, 0.98, std::complex<double>(0, 0.2));
  const auto frame = trapfield::QuantizationFrame::along(b);
  const auto u = frame.to_atom(b.lab_polarization()).cartesian();
  CHECK(std::abs(u.z()) == doctest::Approx(0.98 / std::hypot(0.98, 0.2)).epsilon(1e-12));
  CHECK(std::abs(u.x()) == doctest::Approx(0.2 / std::hypot(0.98, 0.2)).epsilon(1e-12));
  CHECK(std::abs(u.y()) < 1e-12);
  const Eigen::Matrix3d R = frame.rotation();
  CHECK((R * R.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-14);
  CHECK(R.determinant() == doctest::Approx(1.0));
  // field_at reproduces the local intensity
  const Vec3 r(205e-9, 0.5e-6, 0.2e-6);
  CHECK(trapfield::field_at(b, r, frame).intensity == doctest::Approx(trapfield::field_intensity(b, r)));
}

TEST_CASE("coupling profile") {
  trapfield::ResonatorGeometry res;
  res.g_max = two_pi * 43.7e6;
  CHECK(trapfield::coupling_strength(res, Vec3::Zero()) == doctest::Approx(res.g_max).epsilon(1e-15));
  const double L = res.decay_length();
  CHECK(trapfield::coupling_strength(res, Vec3(L, 0, 0)) == doctest::Approx(res.g_max / std::exp(1.0)).epsilon(1e-12));
  CHECK(trapfield::coupling_strength(res, Vec3(0, 0, 7.5e-6)) < 0.05 * res.g_max);
  // evanescent decay with the bulk index: lambda / (2 pi sqrt(n^2 - 1))
  res.decay = trapfield::DecayModel::bulk_index;
  CHECK(res.decay_length() == doctest::Approx(780.241e-9 / (two_pi * std::sqrt(1.45 * 1.45 - 1))).epsilon(1e-12));
  res.decay = trapfield::DecayModel::effective_index;
  const double neff = res.effective_index();
  CHECK(neff > 1.0);
  CHECK(neff < 1.45);
  CHECK(res.decay_length() == doctest::Approx(780.241e-9 / (two_pi * std::sqrt(neff * neff - 1))).epsilon(1e-12));
  res.decay_length_override = 100e-9;
  CHECK(res.decay_length() == 100e-9);
}
