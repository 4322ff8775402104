#include "wgm/trapfield.hpp"

#include "wgm/constants.hpp"
#include "wgm/error.hpp"

#include <Eigen/Eigenvalues>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <complex>
#include <functional>

namespace wgm::trapfield {

using constants::pi;

double BeamGeometry::omega() const { return constants::two_pi * constants::speed_of_light / wavelength; }

double BeamGeometry::reflection() const {
  // custom polarizations are treated by their dominant axis
  const auto u = lab_polarization();
  const double s_weight = std::norm(u[1]);
  const Polarization p = s_weight >= 0.5 ? Polarization::s : Polarization::p;
  return fresnel_reflection(p, theta, refractive_index);
}

double BeamGeometry::contrast() const {
  const auto u = lab_polarization();
  return std::norm(u[1]) >= 0.5 ? 1.0 : std::cos(2.0 * theta);
}

Eigen::Vector3cd BeamGeometry::lab_polarization() const {
  switch (pol_axis) {
  case PolAxis::y:
    return Eigen::Vector3cd(0, 1, 0);
  case PolAxis::zprime:
    return Eigen::Vector3cd(std::sin(theta), 0, std::cos(theta));
  case PolAxis::custom:
    if (!custom_pol) throw Error(ErrorKind::config, "polarization", "custom polarization vector missing");
    return custom_pol->normalized();
  }
  return Eigen::Vector3cd(0, 1, 0);
}

QuantizationFrame::QuantizationFrame(const Vec3 &axis) {
  const Vec3 a = axis.normalized();
  Vec3 e1, e2;
  if (std::abs(a.y()) > 1.0 - 1e-12) {
    // y -> z by the cyclic permutation (x, y, z) -> (z, x, y)
    e1 = Vec3(0, 0, a.y() > 0 ? 1 : -1);
    e2 = Vec3(1, 0, 0);
  } else {
    e2 = Vec3(0, 1, 0);
    e2 = (e2 - a * a.dot(e2)).normalized();
    e1 = e2.cross(a);
  }
  R_.row(0) = e1;
  R_.row(1) = e2;
  R_.row(2) = a;
}

QuantizationFrame QuantizationFrame::along(const BeamGeometry &beam) {
  const auto u = beam.lab_polarization();
  // dominant real direction: principal eigenvector of Re(u u^dagger)
  const Eigen::Matrix3d M = (u * u.adjoint()).real();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
  Vec3 axis = es.eigenvectors().col(2);
  // keep the sign convention of the largest component positive
  Eigen::Index k;
  axis.cwiseAbs().maxCoeff(&k);
  if (axis[k] < 0) axis = -axis;
  return QuantizationFrame(axis);
}

angular::PolVector QuantizationFrame::to_atom(const Eigen::Vector3cd &lab) const {
  return angular::PolVector::normalized(R_.cast<std::complex<double>>() * lab);
}

double fresnel_reflection(Polarization pol, double theta, double n) {
  if (!(n >= 1.0)) throw Error(ErrorKind::domain, "refractive_index", "must be >= 1");
  const double ci = std::cos(theta);
  const double st = std::sin(theta) / n;
  const double ct = std::sqrt(1.0 - st * st);
  if (pol == Polarization::s) return (ci - n * ct) / (ci + n * ct);
  return (n * ci - ct) / (n * ci + ct);
}

double reflection_factor(const BeamGeometry &beam, double x) {
  const double r = std::abs(beam.reflection());
  const double k = constants::two_pi / beam.wavelength;
  return 1.0 + r * r +
         2.0 * r * beam.contrast() * std::cos(2.0 * k * x * std::cos(beam.theta) + beam.reflection_phase);
}

double reflection_factor_derivative(const BeamGeometry &beam, double x) {
  const double r = std::abs(beam.reflection());
  const double k2 = 2.0 * constants::two_pi / beam.wavelength * std::cos(beam.theta);
  return -2.0 * r * beam.contrast() * k2 * std::sin(k2 * x + beam.reflection_phase);
}

double antinode_position(const BeamGeometry &beam) {
  // 2 k x cos(theta) + phi = 2 pi
  const double k = constants::two_pi / beam.wavelength;
  double phase = constants::two_pi - beam.reflection_phase;
  while (phase <= 0) phase += constants::two_pi;
  return phase / (2.0 * k * std::cos(beam.theta));
}

namespace {

double effective_waist(const BeamGeometry &b) {
  const double zR = pi * b.waist * b.waist / b.wavelength;
  return b.waist * std::sqrt(1.0 + (b.focus_offset / zR) * (b.focus_offset / zR));
}

} // namespace

double peak_intensity(const BeamGeometry &beam) {
  const double w = effective_waist(beam);
  return 2.0 * beam.power / (pi * w * w);
}

double field_intensity(const BeamGeometry &beam, const Vec3 &r) {
  const double w = effective_waist(beam);
  const double zc = r.z() * std::cos(beam.theta);
  const double rho2 = r.y() * r.y() + zc * zc;
  return peak_intensity(beam) * std::exp(-2.0 * rho2 / (w * w)) * reflection_factor(beam, r.x());
}

Vec3 field_intensity_gradient(const BeamGeometry &beam, const Vec3 &r) {
  const double w = effective_waist(beam);
  const double c = std::cos(beam.theta);
  const double zc = r.z() * c;
  const double env = peak_intensity(beam) * std::exp(-2.0 * (r.y() * r.y() + zc * zc) / (w * w));
  const double f = reflection_factor(beam, r.x());
  return {env * reflection_factor_derivative(beam, r.x()), env * f * (-4.0 * r.y() / (w * w)),
          env * f * (-4.0 * r.z() * c * c / (w * w))};
}

stark::FieldSpec field_at(const BeamGeometry &beam, const Vec3 &r, const QuantizationFrame &frame) {
  stark::FieldSpec f;
  f.omega = beam.omega();
  f.intensity = field_intensity(beam, r);
  f.pol = frame.to_atom(beam.lab_polarization());
  return f;
}

TrapPotential::TrapPotential(const atomdata::SpeciesData &species, std::vector<BeamGeometry> beams,
                             bool surface_term)
    : beams_(std::move(beams)), c3_(surface_term ? species.surface_c3 : 0.0), mass_(species.mass) {
  if (beams_.empty()) throw Error(ErrorKind::config, "beams", "trap needs at least one beam");
  const QuantizationFrame frame = QuantizationFrame::along(beams_.front());
  for (const auto &b : beams_) {
    auto f = field_at(b, Vec3::Zero(), frame);
    f.intensity = 1.0;
    // mean over the ground manifold = scalar part
    const auto g = stark::ground_shift(species, {f});
    double mean = 0.0;
    for (double s : g.shifts) mean += s;
    coeff_.push_back(constants::hbar * mean / static_cast<double>(g.shifts.size()));
  }
  minimum_ = find_minimum();
  depth_ = find_depth();
}

bool TrapPotential::inside(const Vec3 &r) const {
  const auto &b = beams_.front();
  const double period = b.wavelength / (2.0 * std::cos(b.theta));
  return r.x() > inner_limit_ && r.x() < minimum_.x() + period && std::abs(r.y()) < 3.0 * b.waist &&
         std::abs(r.z()) < 3.0 * b.waist / std::cos(b.theta);
}

HarmonicPotential::HarmonicPotential(double mass, const Vec3 &omega, double depth, const Vec3 &center)
    : mass_(mass), omega_(omega), depth_(depth), center_(center) {}

double HarmonicPotential::value(const Vec3 &r) const {
  const Vec3 d = r - center_;
  return 0.5 * mass_ * (omega_.array().square() * d.array().square()).sum() - depth_;
}

Vec3 HarmonicPotential::gradient(const Vec3 &r) const {
  return mass_ * (omega_.array().square() * (r - center_).array()).matrix();
}

bool HarmonicPotential::inside(const Vec3 &r) const { return value(r) < 0.0; }

double TrapPotential::value(const Vec3 &r) const {
  double U = 0.0;
  for (std::size_t i = 0; i < beams_.size(); ++i) U += coeff_[i] * field_intensity(beams_[i], r);
  if (c3_ != 0.0) U -= c3_ / (r.x() * r.x() * r.x());
  return U;
}

Vec3 TrapPotential::gradient(const Vec3 &r) const {
  Vec3 g = Vec3::Zero();
  for (std::size_t i = 0; i < beams_.size(); ++i) g += coeff_[i] * field_intensity_gradient(beams_[i], r);
  if (c3_ != 0.0) g.x() += 3.0 * c3_ / std::pow(r.x(), 4);
  return g;
}

namespace {

// Extremum of f on [a, b] by dense sampling and Brent refinement.
double extremum(const std::function<double(double)> &f, double a, double b, bool maximize) {
  const int n = 400;
  const double sign = maximize ? -1.0 : 1.0;
  int best = 0;
  double fbest = sign * f(a);
  for (int i = 1; i <= n; ++i) {
    const double v = sign * f(a + (b - a) * i / n);
    if (v < fbest) fbest = v, best = i;
  }
  const double lo = a + (b - a) * std::max(0, best - 1) / n;
  const double hi = a + (b - a) * std::min(n, best + 1) / n;
  // boost's stopping rule has an absolute term, so work on t in [0, 1]
  const auto r = boost::math::tools::brent_find_minima(
      [&](double t) { return sign * f(lo + t * (hi - lo)); }, 0.0, 1.0, 30);
  return lo + r.first * (hi - lo);
}

} // namespace

Vec3 TrapPotential::find_minimum() const {
  const auto &b = beams_.front();
  const double x0 = antinode_position(b);
  const double period = b.wavelength / (2.0 * std::cos(b.theta));
  auto U = [&](double x) { return value(Vec3(x, 0, 0)); };
  return Vec3(extremum(U, x0 - 0.3 * period, x0 + 0.3 * period, false), 0, 0);
}

double TrapPotential::find_depth() const {
  const Vec3 rmin = minimum_;
  const double umin = value(rmin);
  const auto &b = beams_.front();
  const double period = b.wavelength / (2.0 * std::cos(b.theta));
  auto U = [&](double x) { return value(Vec3(x, 0, 0)); };
  const double inner = U(extremum(U, inner_limit_, rmin.x(), true));
  const double outer = U(extremum(U, rmin.x(), rmin.x() + period, true));
  const double transverse = value(Vec3(rmin.x(), 10.0 * b.waist, 0));
  return std::min({inner, outer, transverse}) - umin;
}

Vec3 trap_frequencies(const Potential &U, const Vec3 &r0) {
  const Vec3 h(1e-9, 10e-9, 10e-9);
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    Vec3 d = Vec3::Zero();
    d[i] = h[i];
    const double k = (U.gradient(r0 + d)[i] - U.gradient(r0 - d)[i]) / (2.0 * h[i]);
    if (!(k > 0))
      throw Error(ErrorKind::domain, "r0", "not a minimum: negative curvature along axis " + std::to_string(i));
    out[i] = std::sqrt(k / U.mass());
  }
  return out;
}

double ResonatorGeometry::effective_index() const {
  const double n = refractive_index;
  const double alpha1 = 2.338107410459767; // first zero of Ai(-x)
  const double k0R = constants::two_pi / wavelength * radius;
  const double P = 1.0 / n; // TM
  auto f = [&](double nu) {
    return nu + std::cbrt(0.5) * alpha1 * std::cbrt(nu) - P / std::sqrt(n * n - 1.0) +
           0.3 * std::cbrt(0.25) * alpha1 * alpha1 / std::cbrt(nu) - n * k0R;
  };
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, 1.0, n * k0R, boost::math::tools::eps_tolerance<double>(50),
                                                   iters);
  return 0.5 * (r.first + r.second) / k0R;
}

double ResonatorGeometry::decay_length() const {
  if (decay_length_override) return *decay_length_override;
  const double n = decay == DecayModel::bulk_index ? refractive_index : effective_index();
  if (!(n > 1.0)) throw Error(ErrorKind::domain, "resonator.refractive_index", "must exceed 1");
  return wavelength / (constants::two_pi * std::sqrt(n * n - 1.0));
}

double coupling_strength(const ResonatorGeometry &res, const Vec3 &r) {
  const double zw = res.axial_width();
  return res.g_max * std::exp(-std::max(r.x(), 0.0) / res.decay_length()) * std::exp(-(r.z() / zw) * (r.z() / zw));
}

} // namespace wgm::trapfield
