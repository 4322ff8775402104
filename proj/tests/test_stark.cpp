#include "doctest.h"
#include "oracle.hpp"

#include "wgm/atomdata.hpp"
#include "wgm/constants.hpp"
#include "wgm/error.hpp"
#include "wgm/stark.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <random>

using namespace wgm;
using angular::PolVector;
using constants::two_pi;
using cplx = std::complex<double>;

namespace {

const atomdata::SpeciesData &rb() {
  static const auto s = atomdata::load_species(WGM_DATA_DIR "/rb85.yaml");
  return s;
}

PolVector random_pol(std::mt19937 &rng) {
  std::normal_distribution<double> n(0, 1);
  return PolVector::normalized(Eigen::Vector3cd({n(rng), n(rng)}, {n(rng), n(rng)}, {n(rng), n(rng)}));
}

stark::FieldSpec field(double lambda, double intensity, const PolVector &u) {
  stark::FieldSpec f;
  f.omega = two_pi * constants::speed_of_light / lambda;
  f.intensity = intensity;
  f.pol = u;
  return f;
}

// Second-order light shift operator of `level` in the uncoupled |m_J m_I>
// basis, summed over explicit Zeeman sublevels of every partner level.
Eigen::MatrixXcd brute_force(const atomdata::SpeciesData &sp, const std::string &level, const stark::FieldSpec &f) {
  const auto &self = sp.level(level);
  const int tJ = self.J.twice(), tI = sp.I.twice();
  const int nJ = tJ + 1, nI = tI + 1;
  const auto u = angular::spherical_components(f.pol);
  Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(nJ, nJ);
  for (const auto &c : atomdata::lines_coupling_to(sp, level)) {
    const int tJe = c.partner_J.twice();
    const int ne = tJe + 1;
    // D_q(a, e) = <J a| d_q |J' e> with the reduced element taken as |d|
    auto D = [&](int q) {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(nJ, ne);
      for (int a = 0; a < nJ; ++a)
        for (int e = 0; e < ne; ++e) {
          const int tM = -tJ + 2 * a, tMe = -tJe + 2 * e;
          const int sign = ((tJ - tM) / 2) % 2 ? -1 : 1;
          m(a, e) = sign * oracle::w3j(tJ, 2, tJe, -tM, 2 * q, tMe) * c.line->reduced_dipole;
        }
      return m;
    };
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(nJ, ne), C = A;
    for (int q = -1; q <= 1; ++q) {
      A += D(q) * std::conj(u[q + 1]);
      C += D(q) * u[-q + 1] * ((q % 2) ? -1.0 : 1.0);
    }
    V += A * A.adjoint() / (c.omega - f.omega) + C * C.adjoint() / (c.omega + f.omega);
  }
  V *= -f.amplitude_squared() / 4.0 / (constants::hbar * constants::hbar);
  return Eigen::kroneckerProduct(V, Eigen::MatrixXcd::Identity(nI, nI));
}

// |F M> in the uncoupled basis, J then I.
Eigen::MatrixXcd coupling_matrix(HalfInt J, HalfInt I, const std::vector<stark::HfsState> &basis) {
  const int nJ = J.twice() + 1, nI = I.twice() + 1;
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(nJ * nI, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const auto [F, M] = basis[k];
    for (int a = 0; a < nJ; ++a)
      for (int b = 0; b < nI; ++b) {
        const int tmj = -J.twice() + 2 * a, tmi = -I.twice() + 2 * b;
        const int phase = ((J.twice() - I.twice() + M.twice()) / 2) % 2 ? -1 : 1;
        U(a * nI + b, static_cast<Eigen::Index>(k)) =
            phase * std::sqrt(F.twice() + 1.0) * oracle::w3j(J.twice(), I.twice(), F.twice(), tmj, tmi, -M.twice());
      }
  }
  return U;
}

} // namespace

TEST_CASE("Stark operator matches brute-force second-order perturbation theory") {
  const auto toy = atomdata::parse_species(oracle::toy_species_yaml(false));
  std::mt19937 rng(11);
  for (const std::string level : {"1S1/2", "1P3/2"}) {
    for (int trial = 0; trial < 6; ++trial) {
      const auto f = field(810e-9 + 20e-9 * trial, 1e9, random_pol(rng));
      const auto V = stark::stark_matrix(toy, level, f);
      const auto basis = stark::hfs_basis(toy.level(level).J, toy.I);
      const auto U = coupling_matrix(toy.level(level).J, toy.I, basis);
      const Eigen::MatrixXcd ref = U.adjoint() * brute_force(toy, level, f) * U;
      const double scale = ref.cwiseAbs().maxCoeff();
      CAPTURE(level);
      // diagonal entries and spectrum are phase-convention independent
      for (Eigen::Index i = 0; i < V.rows(); ++i) CHECK(std::abs(V(i, i) - ref(i, i)) < 1e-10 * scale);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> a(V), b(ref);
      CHECK((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10 * scale);
      CHECK((V.cwiseAbs() - ref.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-10 * scale);
    }
  }
}

TEST_CASE("Stark operator is Hermitian with polarization-independent trace") {
  std::mt19937 rng(2);
  for (const std::string level : {"5S1/2", "5P3/2"}) {
    const auto ref = stark::stark_matrix(rb(), level, field(783.68e-9, 1e9, PolVector::z()));
    const double scale = ref.cwiseAbs().maxCoeff();
    for (int trial = 0; trial < 20; ++trial) {
      const auto V = stark::stark_matrix(rb(), level, field(783.68e-9, 1e9, random_pol(rng)));
      CHECK((V - V.adjoint()).cwiseAbs().maxCoeff() < 1e-10 * scale);
      // K = 1, 2 parts are traceless, so the trace is the scalar part alone
      CHECK(std::abs(V.trace() - ref.trace()) < 1e-10 * std::abs(ref.trace()));
    }
  }
}

TEST_CASE("light shift spectrum is invariant under rotation of the polarization") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> ang(0, two_pi);
  for (int trial = 0; trial < 10; ++trial) {
    const auto u = random_pol(rng);
    const Eigen::Matrix3d R = (Eigen::AngleAxisd(ang(rng), Eigen::Vector3d::UnitZ()) *
                               Eigen::AngleAxisd(ang(rng), Eigen::Vector3d::UnitY()) *
                               Eigen::AngleAxisd(ang(rng), Eigen::Vector3d::UnitZ()))
                                  .toRotationMatrix();
    const PolVector v(R.cast<cplx>() * u.cartesian());
    for (const std::string level : {"5S1/2", "5P3/2"}) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> a(stark::stark_matrix(rb(), level, field(783.68e-9, 1e9, u)));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> b(stark::stark_matrix(rb(), level, field(783.68e-9, 1e9, v)));
      CHECK((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff() < 1e-9 * a.eigenvalues().cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("ground shift is scalar for linear light and scales linearly with intensity") {
  const auto g1 = stark::ground_shift(rb(), {field(783.68e-9, 1e9, PolVector::y())});
  const auto g2 = stark::ground_shift(rb(), {field(783.68e-9, 2e9, PolVector::y())});
  CHECK(g1.scalar);
  CHECK(g1.value() < 0); // red of both D lines: attractive
  CHECK(g2.value() == doctest::Approx(2 * g1.value()).epsilon(1e-12));
}

TEST_CASE("scalar polarizability of the ground level from the two-level sums") {
  // alpha_s = sum_e |d|^2 / (3 hbar (2J+1)) * 2 w_e / (w_e^2 - w^2), J = 1/2
  const auto f = field(783.68e-9, 1e9, PolVector::z());
  double alpha = 0.0;
  for (const auto &c : atomdata::lines_coupling_to(rb(), "5S1/2")) {
    const double d = c.line->reduced_dipole;
    alpha += d * d / (3.0 * constants::hbar * 2.0) * 2.0 * c.omega / (c.omega * c.omega - f.omega * f.omega);
  }
  const double expected = -alpha * f.amplitude_squared() / 4.0 / constants::hbar;
  CHECK(stark::ground_shift(rb(), {f}).value() == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("hyperfine energies") {
  // A K/2 + B (3/2 K(K+1) - 2 I(I+1) J(J+1)) / (4 I(2I-1) J(2J-1)), F' = 4 of 5P3/2
  const double K = 20 - 8.75 - 3.75;
  const double expected = 25.0020e6 * K / 2 + 25.790e6 * (1.5 * K * (K + 1) - 2 * 8.75 * 3.75) / (4 * 2.5 * 4 * 1.5 * 2);
  CHECK(stark::hfs_energy(rb(), "5P3/2", HalfInt::from_int(4)) / two_pi == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(100.205e6).epsilon(1e-4));
  const auto H = stark::hfs_matrix(rb(), "5S1/2");
  CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  // ground splitting 3 A
  CHECK((stark::hfs_energy(rb(), "5S1/2", HalfInt::from_int(3)) - stark::hfs_energy(rb(), "5S1/2", HalfInt::from_int(2))) /
            two_pi ==
        doctest::Approx(3 * 1011.910813e6).epsilon(1e-12));
}

TEST_CASE("pole guard") {
  const double w = rb().line("D2").omega;
  stark::FieldSpec f;
  f.omega = w + two_pi * 1e9;
  f.intensity = 1.0;
  CHECK_THROWS_AS(stark::stark_matrix(rb(), "5S1/2", f), Error);
  try {
    stark::stark_matrix(rb(), "5S1/2", f);
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::resonance);
  }
  f.guard.allowed_lines = {"D2"};
  CHECK_NOTHROW(stark::stark_matrix(rb(), "5S1/2", f));
}

TEST_CASE("labels follow bare states at vanishing field") {
  const auto t = stark::diagonalize_interaction(rb(), "5P3/2", {field(783.68e-9, 1.0, PolVector::z())});
  CHECK(t.ambiguous_labels == 0);
  for (const auto &s : t.basis) CHECK(std::abs(t.shift(s)) < two_pi * 1.0);
}

TEST_CASE("transition detuning bookkeeping") {
  // no fields: every F=3 -> F'=4 line sits at zero, F' = 3 at -(E4 - E3)
  const auto g = stark::diagonalize_interaction(rb(), "5S1/2", {field(783.68e-9, 0.0, PolVector::z())});
  const auto e = stark::diagonalize_interaction(rb(), "5P3/2", {field(783.68e-9, 0.0, PolVector::z())});
  const auto d = stark::transition_detunings(rb(), g, e, HalfInt::from_int(3), HalfInt::from_int(4));
  const double gap = stark::hfs_energy(rb(), "5P3/2", HalfInt::from_int(4)) - stark::hfs_energy(rb(), "5P3/2", HalfInt::from_int(3));
  int n4 = 0;
  for (const auto &t : d) {
    CHECK(std::abs(t.ground.M.twice() - t.excited.M.twice()) <= 2);
    if (t.excited.F == HalfInt::from_int(4)) {
      ++n4;
      CHECK(std::abs(t.detuning) < 1e-6);
    } else if (t.excited.F == HalfInt::from_int(3)) {
      CHECK(t.detuning == doctest::Approx(-gap).epsilon(1e-9));
    }
  }
  CHECK(n4 == 21);
}

TEST_CASE("compensation scan rejects a non-monotone grid") {
  stark::ScanSetup s;
  s.fields = [](double) { return std::vector<stark::FieldSpec>{field(783.68e-9, 1e9, PolVector::y())}; };
  CHECK_THROWS_AS(stark::compensation_scan(rb(), s, {0.0, 2e-4, 1e-4}), Error);
}
