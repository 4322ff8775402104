#pragma once

// Integrator kernels, kept inline so the per-step visitor is inlined.

#include <cmath>

namespace wgm::dynamics {

namespace detail {

// Omelyan, Mryglod, Folk (2002) PEFRL coefficients.
inline constexpr double pefrl_xi = 0.1786178958448091;
inline constexpr double pefrl_lambda = -0.2123418310626054;
inline constexpr double pefrl_chi = -0.06626458266981849;

inline double energy(const Potential &U, const Vec3 &r, const Vec3 &v) {
  return 0.5 * U.mass() * v.squaredNorm() + U.value(r);
}

} // namespace detail

template <class Visit>
bool propagate(const Potential &U, InitialCondition s, const IntegratorOptions &opt, Visit &&visit,
               double *max_drift) {
  const double m = U.mass();
  const double dt = opt.dt;
  const long steps = std::lround(opt.duration / dt);
  const double E0 = detail::energy(U, s.r, s.v);
  double drift = 0.0;
  Vec3 a = -U.gradient(s.r) / m;
  for (long n = 0; n < steps; ++n) {
    if (opt.method == Integrator::verlet) {
      s.v += 0.5 * dt * a;
      s.r += dt * s.v;
      a = -U.gradient(s.r) / m;
      s.v += 0.5 * dt * a;
    } else {
      using namespace detail;
      s.r += pefrl_xi * dt * s.v;
      s.v += (1.0 - 2.0 * pefrl_lambda) * 0.5 * dt * (-U.gradient(s.r) / m);
      s.r += pefrl_chi * dt * s.v;
      s.v += pefrl_lambda * dt * (-U.gradient(s.r) / m);
      s.r += (1.0 - 2.0 * (pefrl_chi + pefrl_xi)) * dt * s.v;
      s.v += pefrl_lambda * dt * (-U.gradient(s.r) / m);
      s.r += pefrl_chi * dt * s.v;
      s.v += (1.0 - 2.0 * pefrl_lambda) * 0.5 * dt * (-U.gradient(s.r) / m);
      s.r += pefrl_xi * dt * s.v;
    }
    if (!U.inside(s.r)) {
      if (max_drift) *max_drift = drift;
      return false;
    }
    if (max_drift) drift = std::max(drift, std::abs(detail::energy(U, s.r, s.v) - E0) / std::abs(E0));
    visit(n + 1, s);
  }
  if (max_drift) *max_drift = drift;
  return true;
}

} // namespace wgm::dynamics
