#include "wgm/angular.hpp"

#include "wgm/error.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

namespace wgm::angular {

namespace {

// Exact factorials up to the largest argument seen so far.
const mpz_class &factorial(int n) {
  static std::vector<mpz_class> table{mpz_class(1)};
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  while (static_cast<int>(table.size()) <= n)
    table.push_back(table.back() * static_cast<unsigned long>(table.size()));
  return table[static_cast<std::size_t>(n)];
}

// Triangle coefficient (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)! on doubled args.
mpq_class delta(int ta, int tb, int tc) {
  mpq_class r(factorial((ta + tb - tc) / 2) * factorial((ta - tb + tc) / 2) *
                  factorial((-ta + tb + tc) / 2),
              factorial((ta + tb + tc) / 2 + 1));
  r.canonicalize();
  return r;
}

bool triad(int ta, int tb, int tc) {
  return triangle(HalfInt::from_twice(ta), HalfInt::from_twice(tb), HalfInt::from_twice(tc));
}

// sign * sqrt(pref) * sum, rounded once.
double finish(const mpq_class &pref, const mpq_class &sum) {
  if (sum == 0) return 0.0;
  const mpq_class sq = sum * sum * pref;
  const double mag = std::sqrt(sq.get_d());
  return sgn(sum) < 0 ? -mag : mag;
}

double racah3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
  if ((j1 + m1) % 2 || (j2 + m2) % 2 || (j3 + m3) % 2) return 0.0;
  if (!triad(j1, j2, j3)) return 0.0;

  mpq_class pref = delta(j1, j2, j3);
  pref *= factorial((j1 + m1) / 2) * factorial((j1 - m1) / 2) * factorial((j2 + m2) / 2) *
          factorial((j2 - m2) / 2) * factorial((j3 + m3) / 2) * factorial((j3 - m3) / 2);

  // all quantities below are plain integers
  const int a = (j3 - j2 + m1) / 2;
  const int b = (j3 - j1 - m2) / 2;
  const int c = (j1 + j2 - j3) / 2;
  const int d = (j1 - m1) / 2;
  const int e = (j2 + m2) / 2;
  const int tmin = std::max({0, -a, -b});
  const int tmax = std::min({c, d, e});
  mpq_class sum = 0;
  for (int t = tmin; t <= tmax; ++t) {
    mpz_class den = factorial(t) * factorial(a + t) * factorial(b + t) * factorial(c - t) *
                    factorial(d - t) * factorial(e - t);
    mpq_class term(t % 2 ? -1 : 1, 1);
    term /= den;
    sum += term;
  }
  // (-1)^(j1 - j2 - m3)
  const int phase = (j1 - j2 - m3) / 2;
  if (phase % 2) sum = -sum;
  return finish(pref, sum);
}

double racah6j(int j1, int j2, int j3, int j4, int j5, int j6) {
  const int triads[4][3] = {{j1, j2, j3}, {j1, j5, j6}, {j4, j2, j6}, {j4, j5, j3}};
  mpq_class pref = 1;
  int tmin = 0;
  for (const auto &t : triads) {
    if (!triad(t[0], t[1], t[2])) return 0.0;
    pref *= delta(t[0], t[1], t[2]);
    tmin = std::max(tmin, (t[0] + t[1] + t[2]) / 2);
  }
  const int p1 = (j1 + j2 + j4 + j5) / 2;
  const int p2 = (j2 + j3 + j5 + j6) / 2;
  const int p3 = (j3 + j1 + j6 + j4) / 2;
  const int tmax = std::min({p1, p2, p3});
  mpq_class sum = 0;
  for (int t = tmin; t <= tmax; ++t) {
    mpz_class den = 1;
    for (const auto &tr : triads) den *= factorial(t - (tr[0] + tr[1] + tr[2]) / 2);
    den *= factorial(p1 - t) * factorial(p2 - t) * factorial(p3 - t);
    mpq_class term(factorial(t + 1), den);
    term.canonicalize();
    if (t % 2) term = -term;
    sum += term;
  }
  return finish(pref, sum);
}

// Memo keyed by six doubled arguments packed into 10-bit fields.
class Memo {
public:
  template <class F> double get(std::uint64_t key, F &&compute) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = table_.find(key); it != table_.end()) return it->second;
    }
    const double v = compute();
    std::unique_lock lock(mutex_);
    table_.emplace(key, v);
    return v;
  }

private:
  std::shared_mutex mutex_;
  std::unordered_map<std::uint64_t, double> table_;
};

std::uint64_t pack(std::initializer_list<int> v) {
  std::uint64_t key = 0;
  for (int x : v) key = (key << 10) | static_cast<std::uint64_t>((x + 512) & 0x3ff);
  return key;
}

bool packable(std::initializer_list<int> v) {
  return std::all_of(v.begin(), v.end(), [](int x) { return x > -512 && x < 512; });
}

} // namespace

double wigner3j_twice(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
  static Memo memo;
  auto compute = [&] { return racah3j(tj1, tj2, tj3, tm1, tm2, tm3); };
  if (!packable({tj1, tj2, tj3, tm1, tm2, tm3})) return compute();
  return memo.get(pack({tj1, tj2, tj3, tm1, tm2, tm3}), compute);
}

double wigner6j_twice(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6) {
  static Memo memo;
  auto compute = [&] { return racah6j(tj1, tj2, tj3, tj4, tj5, tj6); };
  if (!packable({tj1, tj2, tj3, tj4, tj5, tj6})) return compute();
  return memo.get(pack({tj1, tj2, tj3, tj4, tj5, tj6}), compute);
}

double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3) {
  return wigner3j_twice(j1.twice(), j2.twice(), j3.twice(), m1.twice(), m2.twice(), m3.twice());
}

double wigner6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6) {
  return wigner6j_twice(j1.twice(), j2.twice(), j3.twice(), j4.twice(), j5.twice(), j6.twice());
}

PolVector::PolVector(const Eigen::Vector3cd &u) : u_(u) {
  if (std::abs(u.squaredNorm() - 1.0) > 1e-12)
    throw Error(ErrorKind::domain, "polarization", "vector is not unit-norm");
}

PolVector PolVector::normalized(const Eigen::Vector3cd &u) {
  const double n = u.norm();
  if (!(n > 0)) throw Error(ErrorKind::domain, "polarization", "zero vector");
  return PolVector(u / n);
}

bool PolVector::is_real_up_to_phase() const {
  // u u^T = |u|^2 phase^2 only for linear polarization
  const cplx s = u_.transpose() * u_;
  return std::abs(std::abs(s) - 1.0) < 1e-12;
}

std::array<cplx, 3> spherical_components(const PolVector &pol) {
  const auto &u = pol.cartesian();
  const double r = 1.0 / std::sqrt(2.0);
  const cplx i(0, 1);
  return {(u[0] - i * u[1]) * r, u[2], -(u[0] + i * u[1]) * r};
}

cplx compound_tensor(const PolVector &u, int K, int q) {
  if (K < 0 || K > 2) throw Error(ErrorKind::domain, "K", "rank must be 0, 1 or 2");
  if (std::abs(q) > K) throw Error(ErrorKind::domain, "q", "|q| exceeds K");
  const auto s = spherical_components(u);
  auto comp = [&](int mu) { return s[static_cast<std::size_t>(mu + 1)]; };
  cplx sum = 0;
  for (int mu = -1; mu <= 1; ++mu) {
    for (int mup = -1; mup <= 1; ++mup) {
      const double w = wigner3j_twice(2, 2 * K, 2, 2 * mu, -2 * q, 2 * mup);
      if (w == 0.0) continue;
      const double sign = ((q + mup) % 2 == 0) ? 1.0 : -1.0;
      sum += sign * comp(mu) * std::conj(comp(-mup)) * w;
    }
  }
  return sum * std::sqrt(2.0 * K + 1.0);
}

} // namespace wgm::angular
