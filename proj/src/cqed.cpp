#include "wgm/cqed.hpp"

#include "wgm/angular.hpp"
#include "wgm/constants.hpp"
#include "wgm/error.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace wgm::cqed {

using cplx = std::complex<double>;
using trapfield::Vec3;

void CqedParams::validate() const {
  if (g < 0 || kappa0 < 0 || kappa_ext < 0 || gamma < 0 || Omega < 0)
    throw Error(ErrorKind::domain, "cqed", "rates must be non-negative");
}

double fluorescence_output(const CqedParams &p) {
  const cplx I(0, 1);
  const cplx D = p.g * p.g + (p.gamma + I * p.Delta_al) * (p.kappa_tot() + I * p.Delta_rl);
  return 2.0 * p.kappa_ext * std::norm(p.g * p.Omega / 2.0 / D);
}

std::complex<double> transmission_amplitude(const CqedParams &p) {
  const cplx I(0, 1);
  const cplx atom = p.gamma + I * p.Delta_al;
  const cplx num = p.g * p.g + atom * (p.kappa0 - p.kappa_ext + I * p.Delta_rl);
  const cplx den = p.g * p.g + atom * (p.kappa_tot() + I * p.Delta_rl);
  return num / den;
}

double transmission(const CqedParams &p) { return std::norm(transmission_amplitude(p)); }

namespace {

using Sparse = Eigen::SparseMatrix<cplx>;

Sparse identity(int n) {
  Sparse I(n, n);
  I.setIdentity();
  return I;
}

struct Operators {
  Sparse a, sigma, id;
  int dim;
};

// Ordering: index = 2 n + s, s = 0 ground, 1 excited.
Operators build_operators(int n_max) {
  const int nf = n_max + 1;
  Sparse af(nf, nf), sm(2, 2);
  for (int n = 1; n < nf; ++n) af.insert(n - 1, n) = std::sqrt(static_cast<double>(n));
  sm.insert(0, 1) = 1.0;
  Operators o;
  o.dim = 2 * nf;
  o.a = Eigen::kroneckerProduct(af, identity(2)).eval();
  o.sigma = Eigen::kroneckerProduct(identity(nf), sm).eval();
  o.id = identity(o.dim);
  return o;
}

SteadyState solve(const CqedParams &p, Drive drive, int n_max, double eps) {
  const Operators op = build_operators(n_max);
  const int d = op.dim;
  const cplx I(0, 1);
  const Sparse ad = op.a.adjoint();
  const Sparse sp = op.sigma.adjoint();
  Sparse H = p.Delta_rl * (ad * op.a) + p.Delta_al * (sp * op.sigma) + p.g * (ad * op.sigma + op.a * sp);
  if (drive == Drive::fluorescence) H += I * (p.Omega / 2.0) * (op.sigma - sp);
  else H += I * std::sqrt(2.0 * p.kappa_ext) * eps * (op.a - ad);

  // vec(A rho B) = (B^T kron A) vec(rho), column-major vec
  Sparse L = -I * (Eigen::kroneckerProduct(op.id, H).eval() - Eigen::kroneckerProduct(Sparse(H.transpose()), op.id).eval());
  auto dissipator = [&](const Sparse &c, double rate) {
    if (rate == 0.0) return;
    const Sparse cdc = c.adjoint() * c;
    const Sparse cc = c.conjugate();
    L += rate * (Eigen::kroneckerProduct(cc, c).eval() - 0.5 * Eigen::kroneckerProduct(op.id, cdc).eval() -
                 0.5 * Eigen::kroneckerProduct(Sparse(cdc.transpose()), op.id).eval());
  };
  dissipator(op.a, 2.0 * p.kappa_tot());
  dissipator(op.sigma, 2.0 * p.gamma);

  // replace the first equation by the trace condition
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> Lr(L);
  Lr.prune([](Eigen::Index row, Eigen::Index, const cplx &) { return row != 0; });
  for (int i = 0; i < d; ++i) Lr.coeffRef(0, i + i * d) = 1.0;
  Sparse A(Lr);
  A.makeCompressed();
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d) * d);
  rhs[0] = 1.0;
  Eigen::SparseLU<Sparse> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::singular, "liouvillian", "factorization failed");
  const Eigen::VectorXcd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw Error(ErrorKind::singular, "liouvillian", "steady state solve failed");
  const Eigen::Map<const Eigen::MatrixXcd> rho(x.data(), d, d);

  SteadyState s;
  s.n_max = n_max;
  s.a = (Eigen::MatrixXcd(op.a) * rho).trace();
  s.sigma = (Eigen::MatrixXcd(op.sigma) * rho).trace();
  s.photons = (Eigen::MatrixXcd(ad * op.a) * rho).trace().real();
  s.excited = (Eigen::MatrixXcd(sp * op.sigma) * rho).trace().real();
  const double top = rho(2 * n_max, 2 * n_max).real() + rho(2 * n_max + 1, 2 * n_max + 1).real();
  if (top > 1e-6) {
    s.n_max = -1; // signal escalation
    return s;
  }
  if (drive == Drive::fluorescence) s.output = 2.0 * p.kappa_ext * std::norm(s.a);
  else s.output = std::norm(eps + std::sqrt(2.0 * p.kappa_ext) * s.a) / (eps * eps);
  return s;
}

} // namespace

SteadyState steadystate_numeric(const CqedParams &p, Drive drive, int n_max, double input_amplitude) {
  p.validate();
  if (n_max < 2) throw Error(ErrorKind::domain, "n_max", "Fock cutoff must be >= 2");
  if (p.kappa_tot() == 0.0 && p.gamma == 0.0)
    throw Error(ErrorKind::singular, "liouvillian", "no dissipation: steady state is not unique");
  if (drive == Drive::transmission && !(input_amplitude > 0))
    throw Error(ErrorKind::domain, "input_amplitude", "transmission drive needs a positive input amplitude");
  for (int n = n_max; n <= 64; n *= 2) {
    SteadyState s = solve(p, drive, n, input_amplitude);
    if (s.n_max > 0) return s;
  }
  throw Error(ErrorKind::cutoff, "n_max", "Fock cutoff 64 still truncates the steady state");
}

std::vector<Site> occupied_sites(const dynamics::PositionHistogram &h) {
  std::vector<Site> out;
  for (std::size_t b = 0; b < h.size(); ++b)
    if (h.mass[b] > 0) out.push_back({h.center_of(b), h.mass[b]});
  return out;
}

CurveMetrics peak_metrics(const std::vector<double> &x, const std::vector<double> &y) {
  CurveMetrics m;
  if (x.size() != y.size() || x.empty()) return m;
  const auto it = std::max_element(y.begin(), y.end());
  const auto i = static_cast<std::size_t>(it - y.begin());
  m.peak_x = x[i];
  m.peak_value = y[i];
  if (i > 0 && i + 1 < y.size()) {
    // parabola through three points (uniform or not)
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
    const double den = (x0 - x1) * (x0 - x2) * (x1 - x2);
    const double A = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den;
    const double B = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den;
    if (A < 0) {
      m.peak_x = -B / (2 * A);
      const double C = y1 - A * x1 * x1 - B * x1;
      m.peak_value = A * m.peak_x * m.peak_x + B * m.peak_x + C;
    }
  }
  const double half = 0.5 * m.peak_value;
  double left = NAN, right = NAN;
  for (std::size_t k = i; k > 0; --k)
    if (y[k - 1] < half) {
      left = x[k - 1] + (half - y[k - 1]) / (y[k] - y[k - 1]) * (x[k] - x[k - 1]);
      break;
    }
  for (std::size_t k = i; k + 1 < y.size(); ++k)
    if (y[k + 1] < half) {
      right = x[k] + (y[k] - half) / (y[k] - y[k + 1]) * (x[k + 1] - x[k]);
      break;
    }
  if (std::isfinite(left) && std::isfinite(right)) m.fwhm = right - left;
  return m;
}

double asymmetry(const std::vector<double> &D, const std::vector<double> &T) {
  const std::size_t n = D.size();
  if (n != T.size() || n < 3) throw Error(ErrorKind::domain, "detuning_grid", "need at least three points");
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(D[i] + D[n - 1 - i]) > 1e-9 * std::abs(D.back()))
      throw Error(ErrorKind::domain, "detuning_grid", "grid must be symmetric about zero");
  double acc = 0.0;
  for (std::size_t i = n / 2; i + 1 < n; ++i) {
    const double a = std::abs(T[i] - T[n - 1 - i]);
    const double b = std::abs(T[i + 1] - T[n - 2 - i]);
    acc += 0.5 * (a + b) * (D[i + 1] - D[i]);
  }
  return acc;
}

std::vector<double> local_minima(const std::vector<double> &x, const std::vector<double> &y) {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] < y[i - 1] && y[i] <= y[i + 1])) continue;
    const double den = y[i - 1] - 2 * y[i] + y[i + 1];
    const double h = 0.5 * (x[i + 1] - x[i - 1]);
    const double shift = den > 0 ? 0.5 * (y[i - 1] - y[i + 1]) / den : 0.0;
    out.push_back(x[i] + shift * h);
  }
  return out;
}

CouplingStats coupling_statistics(const trapfield::ResonatorGeometry &res, const std::vector<Site> &sites) {
  double w = 0, m1 = 0, m2 = 0;
  for (const auto &s : sites) {
    const double g = trapfield::coupling_strength(res, s.r);
    w += s.weight;
    m1 += s.weight * g;
    m2 += s.weight * g * g;
  }
  if (!(w > 0)) return {};
  m1 /= w;
  return {m1, std::sqrt(std::max(0.0, m2 / w - m1 * m1))};
}

namespace {

// Two-field (trap, compensation) models shared by both spectra.
struct LightShiftModels {
  stark::InteractionModel ground;
  stark::InteractionModel excited;
  Eigen::MatrixXcd ground_ref;
  Eigen::MatrixXcd excited_ref;
  trapfield::QuantizationFrame frame;
  double It0, Ic0; // intensities at the minimum, compensation at 1 W
  double hfs_ref;
};

stark::FieldSpec comp_field(const SpectrumSetup &s, const Vec3 &r, const trapfield::QuantizationFrame &frame) {
  auto c = s.compensation;
  c.power = 1.0;
  auto f = trapfield::field_at(c, r, frame);
  f.guard.allowed_lines = s.compensation_lines;
  return f;
}

Vec3 trap_minimum(const SpectrumSetup &s) {
  const trapfield::TrapPotential U(*s.species, {s.trap}, s.surface_term);
  return U.minimum();
}

LightShiftModels build_models(const SpectrumSetup &s, double P_first) {
  const auto frame = trapfield::QuantizationFrame::along(s.trap);
  const Vec3 r0 = trap_minimum(s);
  const auto ft = trapfield::field_at(s.trap, r0, frame);
  const auto fc = comp_field(s, r0, frame);
  LightShiftModels m{stark::InteractionModel(*s.species, s.species->ground_level, {ft, fc}),
                     stark::InteractionModel(*s.species, s.excited_level, {ft, fc}),
                     {},
                     {},
                     frame,
                     ft.intensity,
                     fc.intensity,
                     stark::hfs_energy(*s.species, s.excited_level, HalfInt::from_int(4))};
  // labels at the first grid point follow from a ramp up from zero field
  const int steps = 32;
  auto ramp = [&](const stark::InteractionModel &model) {
    Eigen::MatrixXcd ref = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(model.basis().size()),
                                                      static_cast<Eigen::Index>(model.basis().size()));
    for (int k = 1; k <= steps; ++k) {
      const double f = static_cast<double>(k) / steps;
      ref = model.at({f, f * P_first}, &ref).eigenvectors;
    }
    return ref;
  };
  m.ground_ref = ramp(m.ground);
  m.excited_ref = ramp(m.excited);
  return m;
}

template <class Body> void parallel_for(std::size_t n, int jobs, Body &&body) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
  for (auto &t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void check_setup(const SpectrumSetup &s, const std::vector<Site> &sites, const std::vector<double> &grid) {
  if (!s.species) throw Error(ErrorKind::config, "species", "missing species data");
  if (sites.empty()) throw Error(ErrorKind::domain, "histogram", "no occupied bins");
  if (grid.empty()) throw Error(ErrorKind::domain, "P_c_grid", "empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorKind::domain, "P_c_grid", "grid must be strictly increasing");
}

} // namespace

FluorescenceSpectrum averaged_fluorescence_spectrum(const SpectrumSetup &setup, const std::vector<Site> &sites,
                                                    const std::vector<double> &P_c_grid) {
  check_setup(setup, sites, P_c_grid);
  const auto &sp = *setup.species;
  const auto models = build_models(setup, P_c_grid.front());
  const Vec3 r0 = trap_minimum(setup);
  const HalfInt F = HalfInt::from_int(3), Fp = HalfInt::from_int(4), one = HalfInt::from_int(1);

  // line-strength weights of the 21 Zeeman components
  struct Line {
    stark::HfsState g, e;
    double w;
  };
  std::vector<Line> lines;
  double wsum = 0.0;
  for (int tM = -F.twice(); tM <= F.twice(); tM += 2) {
    const std::size_t k = static_cast<std::size_t>((tM + F.twice()) / 2);
    const double pop = setup.ground_population.empty() ? 1.0 : setup.ground_population.at(k);
    for (int q = -1; q <= 1; ++q) {
      const HalfInt M = HalfInt::from_twice(tM), Mp = M + HalfInt::from_int(q);
      if (Mp.abs() > Fp) continue;
      const double c = angular::wigner3j(F, one, Fp, M, HalfInt::from_int(q), -Mp);
      lines.push_back({{F, M}, {Fp, Mp}, pop * c * c});
      wsum += pop * c * c;
    }
  }
  for (auto &l : lines) l.w /= wsum;

  auto probe = setup.probe;
  probe.power = 1.0;
  const double Ip0 = trapfield::field_intensity(probe, r0);
  const double gamma = sp.gamma;

  std::vector<std::vector<double>> per_site(sites.size());
  parallel_for(sites.size(), setup.jobs, [&](std::size_t i) {
    const Vec3 &r = sites[i].r;
    const double st = trapfield::field_intensity(setup.trap, r) / models.It0;
    const double sc = comp_field(setup, r, models.frame).intensity / models.Ic0;
    const double Ip = setup.probe_saturation * sp.saturation_intensity * trapfield::field_intensity(probe, r) / Ip0;
    CqedParams p;
    p.g = trapfield::coupling_strength(setup.resonator, r);
    p.kappa0 = setup.kappa0;
    p.kappa_ext = setup.kappa_ext;
    p.gamma = gamma;
    p.Omega = gamma * std::sqrt(Ip / (2.0 * sp.saturation_intensity));
    p.Delta_rl = setup.Delta_rl_fluorescence;
    Eigen::MatrixXcd gref = models.ground_ref, eref = models.excited_ref;
    auto &out = per_site[i];
    out.reserve(P_c_grid.size());
    for (double P : P_c_grid) {
      const auto tg = models.ground.at({st, sc * P}, &gref);
      const auto te = models.excited.at({st, sc * P}, &eref);
      gref = tg.eigenvectors;
      eref = te.eigenvectors;
      double acc = 0.0;
      for (const auto &l : lines) {
        p.Delta_al = te.total(l.e) - models.hfs_ref - tg.shift(l.g);
        acc += l.w * fluorescence_output(p);
      }
      out.push_back(acc);
    }
  });

  FluorescenceSpectrum spec;
  spec.P_c = P_c_grid;
  spec.value.assign(P_c_grid.size(), 0.0);
  double wtot = 0.0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    wtot += sites[i].weight;
    for (std::size_t k = 0; k < P_c_grid.size(); ++k) spec.value[k] += sites[i].weight * per_site[i][k];
  }
  for (double &v : spec.value) v /= wtot;
  spec.metrics = peak_metrics(spec.P_c, spec.value);
  return spec;
}

TransmissionScan averaged_transmission_scan(const SpectrumSetup &setup, const std::vector<Site> &sites,
                                            const std::vector<double> &P_c_grid,
                                            const std::vector<double> &detuning_grid) {
  check_setup(setup, sites, P_c_grid);
  const auto models = build_models(setup, P_c_grid.front());
  const stark::HfsState g{HalfInt::from_int(3), HalfInt::from_int(3)};
  const stark::HfsState e{HalfInt::from_int(4), HalfInt::from_int(4)};

  // cycling-transition detuning per site and power
  std::vector<std::vector<double>> delta(sites.size());
  std::vector<double> gsite(sites.size());
  parallel_for(sites.size(), setup.jobs, [&](std::size_t i) {
    const Vec3 &r = sites[i].r;
    const double st = trapfield::field_intensity(setup.trap, r) / models.It0;
    const double sc = comp_field(setup, r, models.frame).intensity / models.Ic0;
    gsite[i] = trapfield::coupling_strength(setup.resonator, r);
    Eigen::MatrixXcd gref = models.ground_ref, eref = models.excited_ref;
    for (double P : P_c_grid) {
      const auto tg = models.ground.at({st, sc * P}, &gref);
      const auto te = models.excited.at({st, sc * P}, &eref);
      gref = tg.eigenvectors;
      eref = te.eigenvectors;
      delta[i].push_back(te.total(e) - models.hfs_ref - tg.shift(g));
    }
  });

  double wtot = 0.0;
  for (const auto &s : sites) wtot += s.weight;
  TransmissionScan scan;
  double best = INFINITY;
  for (std::size_t k = 0; k < P_c_grid.size(); ++k) {
    TransmissionSpectrum ts;
    ts.P_c = P_c_grid[k];
    ts.detuning = detuning_grid;
    ts.T.assign(detuning_grid.size(), 0.0);
    for (std::size_t i = 0; i < sites.size(); ++i) {
      CqedParams p;
      p.g = gsite[i];
      p.kappa0 = setup.kappa0;
      p.kappa_ext = setup.kappa_ext;
      p.gamma = setup.species->gamma;
      for (std::size_t j = 0; j < detuning_grid.size(); ++j) {
        p.Delta_rl = detuning_grid[j];
        p.Delta_al = detuning_grid[j] + delta[i][k];
        ts.T[j] += sites[i].weight * transmission(p);
      }
    }
    for (double &t : ts.T) t /= wtot;
    ts.asymmetry = asymmetry(ts.detuning, ts.T);
    ts.minima = local_minima(ts.detuning, ts.T);
    if (ts.asymmetry < best) {
      best = ts.asymmetry;
      scan.best = k;
    }
    scan.spectra.push_back(std::move(ts));
  }
  return scan;
}

} // namespace wgm::cqed
