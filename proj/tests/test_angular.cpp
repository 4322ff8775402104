#include "doctest.h"
#include "oracle.hpp"

#include "wgm/angular.hpp"
#include "wgm/error.hpp"

#include <cmath>
#include <random>

using namespace wgm;
using angular::PolVector;

TEST_CASE("3j known value and selection rules") {
  const auto one = HalfInt::from_int(1), zero = HalfInt::from_int(0);
  CHECK(angular::wigner3j(one, one, zero, zero, zero, zero) == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(angular::wigner3j_twice(2, 2, 2, 0, 0, 0) == 0.0); // odd j sum with m = 0
  CHECK(angular::wigner3j_twice(2, 2, 2, 2, 0, 0) == 0.0); // m sum
  CHECK(angular::wigner3j_twice(2, 2, 6, 0, 0, 0) == 0.0); // triangle
  CHECK(angular::wigner3j_twice(1, 1, 2, 3, -3, 0) == 0.0); // |m| > j
}

TEST_CASE("3j agrees with a floating Racah evaluation up to j = 4") {
  double worst = 0.0;
  for (int a = 0; a <= 8; ++a)
    for (int b = 0; b <= 8; ++b)
      for (int c = std::abs(a - b); c <= a + b && c <= 8; c += 2)
        for (int ma = -a; ma <= a; ma += 2)
          for (int mb = -b; mb <= b; mb += 2) {
            const int mc = -ma - mb;
            if (std::abs(mc) > c) continue;
            worst = std::max(worst, std::abs(angular::wigner3j_twice(a, b, c, ma, mb, mc) -
                                             oracle::w3j(a, b, c, ma, mb, mc)));
          }
  CHECK(worst < 1e-14);
}

TEST_CASE("3j orthogonality to 1e-12") {
  // sum_{m1 m2} (2 j3 + 1) 3j(j1 j2 j3; m1 m2 m3) 3j(j1 j2 j3'; m1 m2 m3') = delta delta
  double worst = 0.0;
  for (int j1 = 0; j1 <= 9; ++j1)
    for (int j2 = 0; j2 <= 9; ++j2)
      for (int j3 = std::abs(j1 - j2); j3 <= j1 + j2; j3 += 2)
        for (int k3 = std::abs(j1 - j2); k3 <= j1 + j2; k3 += 2)
          for (int m3 = -std::min(j3, k3); m3 <= std::min(j3, k3); m3 += 2) {
            double s = 0.0;
            for (int m1 = -j1; m1 <= j1; m1 += 2) {
              const int m2 = -m1 - m3;
              if (std::abs(m2) > j2) continue;
              s += (j3 + 1) * angular::wigner3j_twice(j1, j2, j3, m1, m2, m3) *
                   angular::wigner3j_twice(j1, j2, k3, m1, m2, m3);
            }
            worst = std::max(worst, std::abs(s - (j3 == k3 ? 1.0 : 0.0)));
          }
  CHECK(worst < 1e-12);
}

TEST_CASE("3j symmetries under column exchange and m reversal") {
  std::mt19937 rng(3);
  for (int n = 0; n < 300; ++n) {
    const int a = rng() % 9, b = rng() % 9;
    const int c = std::abs(a - b) + 2 * static_cast<int>(rng() % (std::min(a, b) + 1));
    const int ma = -a + 2 * static_cast<int>(rng() % (a + 1));
    const int mb = -b + 2 * static_cast<int>(rng() % (b + 1));
    const int mc = -ma - mb;
    if (std::abs(mc) > c) continue;
    const double v = angular::wigner3j_twice(a, b, c, ma, mb, mc);
    const int sign = ((a + b + c) / 2) % 2 ? -1 : 1;
    CHECK(angular::wigner3j_twice(b, a, c, mb, ma, mc) == doctest::Approx(sign * v).epsilon(1e-14));
    CHECK(angular::wigner3j_twice(a, b, c, -ma, -mb, -mc) == doctest::Approx(sign * v).epsilon(1e-14));
    CHECK(angular::wigner3j_twice(b, c, a, mb, mc, ma) == doctest::Approx(v).epsilon(1e-14));
  }
}

TEST_CASE("3j at large j stays normalized") {
  // sum over m of 3j(j j 0; m -m 0)^2 = 1, with j = 40
  double s = 0.0;
  for (int m = -80; m <= 80; m += 2) {
    const double v = angular::wigner3j_twice(80, 80, 0, m, -m, 0);
    s += v * v;
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("6j special value and agreement with the floating oracle") {
  // {a b c; 0 c b} = (-1)^(a+b+c) / sqrt((2b+1)(2c+1))
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; b <= 6; ++b)
      for (int c = std::abs(a - b); c <= a + b; c += 2) {
        const int sign = ((a + b + c) / 2) % 2 ? -1 : 1;
        CHECK(angular::wigner6j_twice(a, b, c, 0, c, b) ==
              doctest::Approx(sign / std::sqrt((b + 1.0) * (c + 1.0))).epsilon(1e-14));
      }
  double worst = 0.0;
  for (int a = 0; a <= 5; ++a)
    for (int b = 0; b <= 5; ++b)
      for (int c = 0; c <= 5; ++c)
        for (int d = 0; d <= 5; ++d)
          for (int e = 0; e <= 5; ++e)
            for (int f = 0; f <= 5; ++f)
              worst = std::max(worst, std::abs(angular::wigner6j_twice(a, b, c, d, e, f) - oracle::w6j(a, b, c, d, e, f)));
  CHECK(worst < 1e-14);
}

TEST_CASE("6j orthogonality") {
  // sum_x (2x+1)(2f+1) {a b x; c d f}{a b x; c d f'} = delta_ff'
  double worst = 0.0;
  for (int a = 0; a <= 5; ++a)
    for (int b = 0; b <= 5; ++b)
      for (int c = 0; c <= 5; ++c)
        for (int d = 0; d <= 5; ++d)
          for (int f = 0; f <= 10; ++f)
            for (int g = 0; g <= 10; ++g) {
              if (!oracle::tri2(a, d, f) || !oracle::tri2(c, b, f) || !oracle::tri2(a, d, g) || !oracle::tri2(c, b, g))
                continue;
              double s = 0.0;
              for (int x = 0; x <= 10; ++x)
                s += (x + 1) * (f + 1) * angular::wigner6j_twice(a, b, x, c, d, f) *
                     angular::wigner6j_twice(a, b, x, c, d, g);
              worst = std::max(worst, std::abs(s - (f == g ? 1.0 : 0.0)));
            }
  CHECK(worst < 1e-12);
}

TEST_CASE("6j sum rule") {
  // sum_x (-1)^(2x) (2x+1) {a b x; a b c} = 1 for integral a, b, c in triangle
  for (int a = 0; a <= 6; a += 2)
    for (int b = 0; b <= 6; b += 2)
      for (int c = std::abs(a - b); c <= a + b; c += 2) {
        double s = 0.0;
        for (int x = std::abs(a - b); x <= a + b; x += 2) s += (x + 1) * angular::wigner6j_twice(a, b, x, a, b, c);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
      }
}

TEST_CASE("polarization vectors") {
  CHECK_THROWS_AS(PolVector(Eigen::Vector3cd(1, 1, 0)), Error);
  CHECK_THROWS_AS(PolVector::normalized(Eigen::Vector3cd::Zero()), Error);
  CHECK(PolVector::x().is_real_up_to_phase());
  const auto circ = PolVector::normalized(Eigen::Vector3cd(1, std::complex<double>(0, 1), 0));
  CHECK_FALSE(circ.is_real_up_to_phase());
  // u = sum_q (-1)^q u_q e_{-q}: sigma+ light e_{+1} = -(x + i y)/sqrt2 has u_{-1} = -1 only
  const auto sp = PolVector::normalized(-Eigen::Vector3cd(1, std::complex<double>(0, 1), 0));
  const auto c = angular::spherical_components(sp);
  CHECK(std::abs(c[0] + 1.0) < 1e-15);
  CHECK(std::abs(c[1]) < 1e-15);
  CHECK(std::abs(c[2]) < 1e-15);
}

namespace {

// {u* (x) u}_{Kq} from the coupling definition, with the floating 3j oracle.
std::complex<double> tensor_oracle(const PolVector &u, int K, int q) {
  const auto s = angular::spherical_components(u);
  std::complex<double> acc = 0;
  for (int mu = -1; mu <= 1; ++mu)
    for (int nu = -1; nu <= 1; ++nu) {
      const double w = oracle::w3j(2, 2 * K, 2, 2 * mu, -2 * q, 2 * nu);
      if (w == 0.0) continue;
      const int sign = ((q + nu) % 2 + 2) % 2 ? -1 : 1;
      acc += static_cast<double>(sign) * s[mu + 1] * std::conj(s[-nu + 1]) * w;
    }
  return std::sqrt(2.0 * K + 1) * acc;
}

} // namespace

TEST_CASE("compound tensor") {
  std::mt19937 rng(5);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto u = PolVector::normalized(Eigen::Vector3cd({n(rng), n(rng)}, {n(rng), n(rng)}, {n(rng), n(rng)}));
    double norm = 0.0;
    for (int K = 0; K <= 2; ++K)
      for (int q = -K; q <= K; ++q) {
        const auto t = angular::compound_tensor(u, K, q);
        CHECK(std::abs(t - tensor_oracle(u, K, q)) < 1e-13);
        norm += std::norm(t);
      }
    // unitary recoupling: sum_Kq |T_Kq|^2 = |u|^4 = 1
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    // scalar part depends only on |u|
    CHECK(std::abs(angular::compound_tensor(u, 0, 0) + 1.0 / std::sqrt(3.0)) < 1e-13);
  }
  // linear polarization carries no rank-1 part
  for (int q = -1; q <= 1; ++q) CHECK(std::abs(angular::compound_tensor(PolVector::y(), 1, q)) < 1e-15);
  CHECK_THROWS_AS(angular::compound_tensor(PolVector::z(), 3, 0), Error);
  CHECK_THROWS_AS(angular::compound_tensor(PolVector::z(), 1, 2), Error);
}
