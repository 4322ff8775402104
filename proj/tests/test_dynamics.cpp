#include "doctest.h"

#include "wgm/atomdata.hpp"
#include "wgm/constants.hpp"
#include "wgm/dynamics.hpp"
#include "wgm/error.hpp"

#include <cmath>
#include <set>

using namespace wgm;
using constants::pi;
using constants::two_pi;
using trapfield::Vec3;

namespace {

const atomdata::SpeciesData &rb() {
  static const auto s = atomdata::load_species(WGM_DATA_DIR "/rb85.yaml");
  return s;
}

const trapfield::TrapPotential &trap() {
  static const trapfield::TrapPotential U = [] {
    trapfield::BeamGeometry b;
    b.power = 18.7e-3;
    b.wavelength = 783.68e-9;
    b.theta = 17 * pi / 180;
    return trapfield::TrapPotential(rb(), {b});
  }();
  return U;
}

double kinetic(double m, const Vec3 &v) { return 0.5 * m * v.squaredNorm(); }

} // namespace

TEST_CASE("seed derivation") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(dynamics::derive_seed(1, k));
  CHECK(seen.size() == 1000);
  CHECK(dynamics::derive_seed(7, 3) == dynamics::derive_seed(7, 3));
  CHECK(dynamics::derive_seed(7, 3) != dynamics::derive_seed(8, 3));
}

TEST_CASE("clipped Gaussian energy distribution is normalized") {
  const double U0 = 1.0;
  const auto d = dynamics::EnergyDistribution::gaussian(2.0 / 3.0, 0.2, U0);
  double s = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) s += d.pdf((i + 0.5) / n) / n;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(d.cdf(0.0) == doctest::Approx(0.0));
  CHECK(d.cdf(U0) == doctest::Approx(1.0));
  CHECK(d.pdf(1.5) == 0.0);
}

TEST_CASE("sampled initial conditions carry the requested energy") {
  const auto &U = trap();
  const double Umin = U.value(U.minimum());
  for (auto mode : {dynamics::Sampling::uniform, dynamics::Sampling::microcanonical})
    for (int k = 0; k < 20; ++k) {
      const double E = (0.05 + 0.045 * k) * U.depth();
      const auto ic = dynamics::sample_initial_conditions(E, U, dynamics::derive_seed(3, k), mode);
      CHECK(U.value(ic.r) - Umin + kinetic(U.mass(), ic.v) == doctest::Approx(E).epsilon(1e-10));
      CHECK(U.inside(ic.r));
    }
  CHECK_THROWS_AS(dynamics::sample_initial_conditions(1.1 * U.depth(), U, 1), Error);
}

TEST_CASE("harmonic oscillator: analytic orbit and virial theorem") {
  const Vec3 w(two_pi * 1e6, two_pi * 60e3, two_pi * 50e3);
  const double m = rb().mass;
  const trapfield::HarmonicPotential U(m, w, 1e-20);
  dynamics::InitialCondition ic{Vec3(10e-9, 200e-9, -150e-9), Vec3(0.1, 0.0, 0.02)};
  dynamics::IntegratorOptions opt;
  opt.dt = two_pi / w.x() / 100;
  opt.duration = 200e-6;
  const auto tr = dynamics::integrate_trajectory(U, ic, opt);
  REQUIRE_FALSE(tr.escaped);
  // x(t) = x0 cos(wt) + v0/w sin(wt) for the last sample
  const double t = tr.times.back();
  for (int k = 0; k < 3; ++k) {
    const double exact = ic.r[k] * std::cos(w[k] * t) + ic.v[k] / w[k] * std::sin(w[k] * t);
    const double amp = std::hypot(ic.r[k], ic.v[k] / w[k]);
    CHECK(std::abs(tr.positions.back()[k] - exact) < 1e-5 * amp); // 200 fast periods at T/100
  }
  // <T> = <V - V_min> per axis over many periods
  double T = 0, V = 0;
  for (std::size_t i = 0; i < tr.positions.size(); ++i) {
    T += kinetic(m, tr.velocities[i]);
    V += U.value(tr.positions[i]) + 1e-20;
  }
  CHECK(T == doctest::Approx(V).epsilon(0.01));
}

TEST_CASE("energy drift stays below 1e-6 over 50 us in the trap") {
  const auto &U = trap();
  dynamics::IntegratorOptions opt;
  opt.duration = 50e-6;
  const Vec3 w = trapfield::trap_frequencies(U, U.minimum());
  opt.dt = two_pi / w.x() / 50;
  for (int k = 0; k < 5; ++k) {
    const auto ic = dynamics::sample_initial_conditions((0.2 + 0.15 * k) * U.depth(), U, dynamics::derive_seed(9, k));
    const auto tr = dynamics::integrate_trajectory(U, ic, opt);
    CHECK_FALSE(tr.escaped);
    CHECK(tr.max_relative_drift <= 1e-6);
  }
}

TEST_CASE("Verlet is second order") {
  const auto &U = trap();
  const auto ic = dynamics::sample_initial_conditions(0.5 * U.depth(), U, 5);
  const double T = two_pi / trapfield::trap_frequencies(U, U.minimum()).x();
  dynamics::IntegratorOptions opt;
  opt.method = dynamics::Integrator::verlet;
  opt.duration = 5e-6;
  opt.dt = T / 100;
  const double d1 = dynamics::integrate_trajectory(U, ic, opt).max_relative_drift;
  opt.dt = T / 200;
  const double d2 = dynamics::integrate_trajectory(U, ic, opt).max_relative_drift;
  CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("position histogram: normalization, determinism, serialization") {
  const auto &U = trap();
  dynamics::DistributionOptions o;
  o.n_per_energy = 3;
  o.n_energies = 4;
  o.duration = 20e-6;
  const auto dist = dynamics::EnergyDistribution::gaussian(2.0 / 3.0 * U.depth(), 0.2 * U.depth(), U.depth());
  const auto a = dynamics::position_distribution(U, dist, o);
  CHECK(std::abs(a.histogram.total() - 1.0) < 1e-12);
  for (const auto &h : a.per_energy) CHECK(std::abs(h.total() - 1.0) < 1e-12);
  double wsum = 0;
  for (double w : a.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a.max_relative_drift <= 1e-6);

  o.jobs = 3;
  const auto b = dynamics::position_distribution(U, dist, o);
  CHECK(a.histogram.serialize() == b.histogram.serialize());

  const auto text = a.histogram.serialize();
  const auto back = dynamics::PositionHistogram::parse(text);
  CHECK(back.serialize() == text);
  CHECK(back.shape == a.histogram.shape);

  o.seed = 2;
  CHECK(dynamics::position_distribution(U, dist, o).histogram.serialize() != text);
}

TEST_CASE("histogram geometry") {
  const auto h = dynamics::PositionHistogram::centered(Vec3(205e-9, 0, 0), Vec3(20e-9, 100e-9, 100e-9), {20, 40, 40});
  CHECK(h.volume() == doctest::Approx(6.4e-18));
  const auto i = h.locate(Vec3(205e-9 + 1e-12, 1e-12, 1e-12));
  REQUIRE(i);
  CHECK((h.center_of(*i) - Vec3(215e-9, 50e-9, 50e-9)).norm() < 1e-15);
  CHECK_FALSE(h.locate(Vec3(0, 0, 0)));
  CHECK_THROWS_AS(dynamics::PositionHistogram::parse("# garbage\n1 2"), Error);
}

TEST_CASE("adiabatic lowering maps") {
  const double U0 = 1.0;
  CHECK(dynamics::survival_threshold(0.25, U0) == doctest::Approx(0.5));
  CHECK(dynamics::survival_threshold(1.0, U0, dynamics::AdiabaticMapping::action1d) == doctest::Approx(1.0).epsilon(1e-9));
  // deep in the well the pendulum action reduces to the harmonic one
  CHECK(dynamics::survival_threshold(1e-4, U0, dynamics::AdiabaticMapping::action1d) ==
        doctest::Approx(1e-2).epsilon(0.01));
  const auto d = dynamics::EnergyDistribution::gaussian(2.0 / 3.0, 0.2, U0);
  std::vector<double> u;
  for (int i = 0; i <= 40; ++i) u.push_back(i / 40.0);
  for (auto map : {dynamics::AdiabaticMapping::harmonic, dynamics::AdiabaticMapping::action1d}) {
    const auto eta = dynamics::adiabatic_survival(d, u, map);
    CHECK(eta.front() == doctest::Approx(0.0));
    CHECK(eta.back() == doctest::Approx(1.0));
    for (std::size_t i = 1; i < eta.size(); ++i) CHECK(eta[i] >= eta[i - 1]);
    const auto rec = dynamics::reconstruct_energy_distribution(u, eta, U0, map);
    REQUIRE(rec.fit);
    CHECK(rec.fit->E0() == doctest::Approx(2.0 / 3.0).epsilon(0.05));
  }
}

TEST_CASE("reconstruction flags non-monotone survival data") {
  const std::vector<double> u{0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
  const std::vector<double> eta{0.0, 0.2, 0.5, 0.4, 0.9, 1.0};
  const auto rec = dynamics::reconstruct_energy_distribution(u, eta, 1.0);
  CHECK_FALSE(rec.warnings.empty());
  for (double p : rec.density) CHECK(p >= 0.0);
}
