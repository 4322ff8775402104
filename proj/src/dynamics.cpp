#include "wgm/dynamics.hpp"

#include "wgm/constants.hpp"
#include "wgm/error.hpp"

#include <Eigen/Core>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include <boost/math/special_functions/ellint_1.hpp>
#include <boost/math/special_functions/ellint_2.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <mutex>
#include <thread>

namespace wgm::dynamics {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace

EnergyDistribution EnergyDistribution::gaussian(double E0, double sigma, double U0) {
  if (!(U0 > 0) || !(sigma > 0)) throw Error(ErrorKind::domain, "energy_distribution", "U0 and sigma must be > 0");
  if (E0 > U0) throw Error(ErrorKind::domain, "energy_distribution.E0", "E0 exceeds the trap depth");
  EnergyDistribution d;
  d.gaussian_ = true;
  d.E0_ = E0;
  d.sigma_ = sigma;
  d.U0_ = U0;
  d.norm_ = normal_cdf((U0 - E0) / sigma) - normal_cdf(-E0 / sigma);
  return d;
}

EnergyDistribution EnergyDistribution::empirical(std::vector<double> edges, std::vector<double> density,
                                                 double U0) {
  if (edges.size() != density.size() + 1 || density.empty())
    throw Error(ErrorKind::domain, "energy_distribution", "need n+1 edges for n density values");
  double total = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    if (!(edges[i + 1] > edges[i])) throw Error(ErrorKind::domain, "energy_distribution", "edges must increase");
    density[i] = std::max(0.0, density[i]);
    total += density[i] * (edges[i + 1] - edges[i]);
  }
  if (!(total > 0)) throw Error(ErrorKind::domain, "energy_distribution", "density integrates to zero");
  for (double &v : density) v /= total;
  EnergyDistribution d;
  d.gaussian_ = false;
  d.U0_ = U0;
  d.edges_ = std::move(edges);
  d.density_ = std::move(density);
  return d;
}

double EnergyDistribution::pdf(double E) const {
  if (E < 0 || E > U0_) return 0.0;
  if (gaussian_) {
    const double t = (E - E0_) / sigma_;
    return std::exp(-0.5 * t * t) / (sigma_ * std::sqrt(constants::two_pi) * norm_);
  }
  if (E < edges_.front() || E >= edges_.back()) return 0.0;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), E);
  return density_[static_cast<std::size_t>(it - edges_.begin() - 1)];
}

double EnergyDistribution::cdf(double E) const {
  if (E <= 0) return 0.0;
  if (E >= U0_) return 1.0;
  if (gaussian_) return (normal_cdf((E - E0_) / sigma_) - normal_cdf(-E0_ / sigma_)) / norm_;
  double acc = 0.0;
  for (std::size_t i = 0; i < density_.size(); ++i) {
    if (E <= edges_[i]) break;
    acc += density_[i] * (std::min(E, edges_[i + 1]) - edges_[i]);
  }
  return std::min(acc, 1.0);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

// Distance from the minimum along +-axis to the first point where U - Umin > E.
double axis_extent(const Potential &U, const Vec3 &rmin, double umin, double E, const Vec3 &dir) {
  auto above = [&](double t) { return U.value(rmin + t * dir) - umin > E; };
  double inside = 0.0;
  double t = 1e-12;
  while (!above(t)) {
    inside = t;
    t *= 1.05;
    if (t > 1.0) throw Error(ErrorKind::domain, "energy", "allowed region unbounded");
    if (!U.inside(rmin + t * dir)) return inside;
  }
  double outside = t;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (inside + outside);
    (above(mid) ? outside : inside) = mid;
  }
  return inside;
}

} // namespace

InitialCondition sample_initial_conditions(double E, const Potential &U, std::uint64_t seed, Sampling mode) {
  if (!(E > 0)) throw Error(ErrorKind::domain, "energy", "total energy must be positive");
  if (E >= U.depth()) throw Error(ErrorKind::domain, "energy", "energy at or above the trap depth (untrapped)");
  const Vec3 rmin = U.minimum();
  const double umin = U.value(rmin);
  Vec3 lo, hi;
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Zero();
    e[i] = 1.0;
    // the x extent on axis is exact for the trap; transverse extents get a margin
    const double margin = i == 0 ? 1.0 : 1.25;
    lo[i] = rmin[i] - margin * axis_extent(U, rmin, umin, E, -e);
    hi[i] = rmin[i] + margin * axis_extent(U, rmin, umin, E, e);
  }
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (long attempt = 0; attempt < 10'000'000; ++attempt) {
    Vec3 r;
    for (int i = 0; i < 3; ++i) r[i] = lo[i] + (hi[i] - lo[i]) * uni(gen);
    const double dU = U.value(r) - umin;
    const double accept = mode == Sampling::uniform ? 1.0 : std::sqrt(std::max(0.0, (E - dU) / E));
    if (dU > E || uni(gen) >= accept) continue;
    Vec3 dir(normal(gen), normal(gen), normal(gen));
    dir.normalize();
    const double speed = std::sqrt(2.0 * std::max(0.0, E - dU) / U.mass());
    return {r, speed * dir};
  }
  throw Error(ErrorKind::domain, "energy", "rejection sampling failed to find an allowed point");
}

Trajectory integrate_trajectory(const Potential &U, const InitialCondition &ic, const IntegratorOptions &opt) {
  if (!(opt.dt > 0) || !(opt.duration > 0))
    throw Error(ErrorKind::domain, "integrator", "dt and duration must be positive");
  Trajectory t;
  auto store = [&](double time, const InitialCondition &s) {
    t.times.push_back(time);
    t.positions.push_back(s.r);
    t.velocities.push_back(s.v);
    t.total_energy.push_back(0.5 * U.mass() * s.v.squaredNorm() + U.value(s.r));
  };
  store(0.0, ic);
  const int every = std::max(1, opt.sample_every);
  const bool ok = propagate(
      U, ic, opt,
      [&](long n, const InitialCondition &s) {
        if (n % every == 0) store(static_cast<double>(n) * opt.dt, s);
      },
      &t.max_relative_drift);
  t.escaped = !ok;
  return t;
}

PositionHistogram PositionHistogram::centered(const Vec3 &center, const Vec3 &bin, const std::array<int, 3> &shape) {
  PositionHistogram h;
  h.bin = bin;
  h.shape = shape;
  for (int i = 0; i < 3; ++i) h.origin[i] = center[i] - 0.5 * bin[i] * shape[static_cast<std::size_t>(i)];
  h.mass.assign(h.size(), 0.0);
  return h;
}

std::optional<std::size_t> PositionHistogram::locate(const Vec3 &r) const {
  int idx[3];
  for (int i = 0; i < 3; ++i) {
    const double f = std::floor((r[i] - origin[i]) / bin[i]);
    if (f < 0 || f >= shape[static_cast<std::size_t>(i)]) return std::nullopt;
    idx[i] = static_cast<int>(f);
  }
  return index(idx[0], idx[1], idx[2]);
}

Vec3 PositionHistogram::center_of(std::size_t flat) const {
  const int k = static_cast<int>(flat % static_cast<std::size_t>(shape[2]));
  const int j = static_cast<int>((flat / static_cast<std::size_t>(shape[2])) % static_cast<std::size_t>(shape[1]));
  const int i = static_cast<int>(flat / (static_cast<std::size_t>(shape[2]) * shape[1]));
  return origin + Vec3((i + 0.5) * bin[0], (j + 0.5) * bin[1], (k + 0.5) * bin[2]);
}

double PositionHistogram::total() const {
  long double s = 0.0L;
  for (double m : mass) s += m;
  return static_cast<double>(s);
}

std::string PositionHistogram::serialize() const {
  std::ostringstream os;
  char buf[256];
  os << "# wgm position histogram v1\n";
  std::snprintf(buf, sizeof buf, "# origin_m %.17g %.17g %.17g\n", origin[0], origin[1], origin[2]);
  os << buf;
  std::snprintf(buf, sizeof buf, "# bin_m %.17g %.17g %.17g\n", bin[0], bin[1], bin[2]);
  os << buf;
  std::snprintf(buf, sizeof buf, "# shape %d %d %d\n", shape[0], shape[1], shape[2]);
  os << buf;
  os << "# i j k mass\n";
  for (int i = 0; i < shape[0]; ++i)
    for (int j = 0; j < shape[1]; ++j)
      for (int k = 0; k < shape[2]; ++k) {
        const double m = mass[index(i, j, k)];
        if (m == 0.0) continue;
        std::snprintf(buf, sizeof buf, "%d %d %d %.17g\n", i, j, k, m);
        os << buf;
      }
  return os.str();
}

PositionHistogram PositionHistogram::parse(const std::string &text) {
  PositionHistogram h;
  std::istringstream is(text);
  std::string line;
  bool have_shape = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "origin_m") ls >> h.origin[0] >> h.origin[1] >> h.origin[2];
      else if (key == "bin_m") ls >> h.bin[0] >> h.bin[1] >> h.bin[2];
      else if (key == "shape") {
        ls >> h.shape[0] >> h.shape[1] >> h.shape[2];
        h.mass.assign(h.size(), 0.0);
        have_shape = true;
      }
      continue;
    }
    if (!have_shape) throw Error(ErrorKind::parse, "histogram", "data row before shape header");
    int i, j, k;
    double m;
    if (!(ls >> i >> j >> k >> m) || i < 0 || j < 0 || k < 0 || i >= h.shape[0] || j >= h.shape[1] ||
        k >= h.shape[2])
      throw Error(ErrorKind::parse, "histogram", "malformed row: " + line);
    h.mass[h.index(i, j, k)] = m;
  }
  if (!have_shape) throw Error(ErrorKind::parse, "histogram", "missing shape header");
  return h;
}

namespace {

double default_dt(const Potential &U) {
  const Vec3 w = trapfield::trap_frequencies(U, U.minimum());
  return constants::two_pi / w.maxCoeff() / 50.0;
}

struct Counts {
  std::vector<std::uint64_t> bins;
  std::uint64_t outside = 0;
  std::size_t escaped = 0;
  double drift = 0.0;
};

// Runs trajectories for every (energy, trajectory) task; integer counts keep
// the reduction independent of scheduling.
std::vector<Counts> run_tasks(const Potential &U, const std::vector<double> &energies, const DistributionOptions &opt,
                              const PositionHistogram &grid, const std::vector<std::uint64_t> &streams) {
  IntegratorOptions io;
  io.method = opt.method;
  io.dt = opt.dt > 0 ? opt.dt : default_dt(U);
  io.duration = opt.duration;
  const double dt_max = default_dt(U) * (1.0 + 1e-9);
  if (io.dt > dt_max) throw Error(ErrorKind::domain, "dt", "time step exceeds T_x/50");

  const std::size_t n_e = energies.size();
  const std::size_t n_tasks = n_e * static_cast<std::size_t>(opt.n_per_energy);
  const int jobs = std::max(1, opt.jobs);
  std::vector<std::vector<Counts>> local(static_cast<std::size_t>(jobs), std::vector<Counts>(n_e));
  for (auto &l : local)
    for (auto &c : l) c.bins.assign(grid.size(), 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&](int w) {
    auto &mine = local[static_cast<std::size_t>(w)];
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= n_tasks) return;
      const std::size_t ie = task / static_cast<std::size_t>(opt.n_per_energy);
      const std::size_t it = task % static_cast<std::size_t>(opt.n_per_energy);
      try {
        const auto seed = derive_seed(streams[ie], it);
        const auto ic = sample_initial_conditions(energies[ie], U, seed, opt.sampling);
        auto &c = mine[ie];
        double drift = 0.0;
        const bool ok = propagate(
            U, ic, io,
            [&](long, const InitialCondition &s) {
              if (const auto b = grid.locate(s.r)) ++c.bins[*b];
              else ++c.outside;
            },
            it == 0 ? &drift : nullptr);
        if (!ok) ++c.escaped;
        c.drift = std::max(c.drift, drift);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_tasks;
        return;
      }
    }
  };
  if (jobs == 1) worker(0);
  else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
    for (auto &t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Counts> total(n_e);
  for (std::size_t e = 0; e < n_e; ++e) {
    total[e].bins.assign(grid.size(), 0);
    for (const auto &l : local) {
      for (std::size_t b = 0; b < grid.size(); ++b) total[e].bins[b] += l[e].bins[b];
      total[e].outside += l[e].outside;
      total[e].escaped += l[e].escaped;
      total[e].drift = std::max(total[e].drift, l[e].drift);
    }
  }
  return total;
}

PositionHistogram normalized(const PositionHistogram &grid, const Counts &c) {
  PositionHistogram h = grid;
  std::uint64_t sum = 0;
  for (auto v : c.bins) sum += v;
  if (sum == 0) return h;
  for (std::size_t b = 0; b < h.size(); ++b) h.mass[b] = static_cast<double>(c.bins[b]) / static_cast<double>(sum);
  return h;
}

} // namespace

PositionHistogram fixed_energy_histogram(const Potential &U, double E, const DistributionOptions &opt,
                                         std::uint64_t stream, std::size_t *escaped, double *outside,
                                         double *drift) {
  const auto grid = PositionHistogram::centered(U.minimum(), opt.bin, opt.shape);
  const auto counts = run_tasks(U, {E}, opt, grid, {derive_seed(opt.seed, stream)});
  if (escaped) *escaped = counts[0].escaped;
  std::uint64_t inside = 0;
  for (auto v : counts[0].bins) inside += v;
  if (outside)
    *outside = static_cast<double>(counts[0].outside) / std::max<double>(1.0, static_cast<double>(inside + counts[0].outside));
  if (drift) *drift = counts[0].drift;
  return normalized(grid, counts[0]);
}

DistributionResult position_distribution(const Potential &U, const EnergyDistribution &dist,
                                         const DistributionOptions &opt) {
  if (opt.n_energies < 1 || opt.n_per_energy < 1)
    throw Error(ErrorKind::domain, "monte_carlo", "need at least one energy and one trajectory");
  DistributionResult res;
  const double U0 = U.depth();
  const auto grid = PositionHistogram::centered(U.minimum(), opt.bin, opt.shape);
  double wsum = 0.0;
  for (int k = 0; k < opt.n_energies; ++k) {
    const double f = opt.n_energies == 1 ? opt.e_lo : opt.e_lo + (opt.e_hi - opt.e_lo) * k / (opt.n_energies - 1);
    res.energies.push_back(f * U0);
    res.weights.push_back(dist.pdf(f * U0 * dist.U0() / U0));
    wsum += res.weights.back();
  }
  if (!(wsum > 0)) throw Error(ErrorKind::domain, "energy_distribution", "no weight on the energy grid");
  for (double &w : res.weights) w /= wsum;

  std::vector<std::uint64_t> streams;
  for (int k = 0; k < opt.n_energies; ++k) streams.push_back(derive_seed(opt.seed, static_cast<std::uint64_t>(k)));
  const auto counts = run_tasks(U, res.energies, opt, grid, streams);

  res.histogram = grid;
  std::uint64_t in_all = 0, out_all = 0;
  for (std::size_t e = 0; e < counts.size(); ++e) {
    res.per_energy.push_back(normalized(grid, counts[e]));
    res.escaped += counts[e].escaped;
    res.max_relative_drift = std::max(res.max_relative_drift, counts[e].drift);
    out_all += counts[e].outside;
    for (auto v : counts[e].bins) in_all += v;
    for (std::size_t b = 0; b < grid.size(); ++b) res.histogram.mass[b] += res.weights[e] * res.per_energy[e].mass[b];
  }
  const double t = res.histogram.total();
  if (t > 0)
    for (double &m : res.histogram.mass) m /= t;
  res.outside_fraction = static_cast<double>(out_all) / std::max<double>(1.0, static_cast<double>(in_all + out_all));
  return res;
}

namespace {

// Action of a -U0 cos^2 well at eps = E/U0, in units where the separatrix has 2.
double pendulum_action(double eps) {
  if (eps <= 0) return 0.0;
  if (eps >= 1) return 2.0;
  const double k = std::sqrt(eps);
  return 2.0 * (boost::math::ellint_2(k) - (1.0 - eps) * boost::math::ellint_1(k));
}

} // namespace

double survival_threshold(double u, double U0, AdiabaticMapping mapping) {
  u = std::clamp(u, 0.0, 1.0);
  if (mapping == AdiabaticMapping::harmonic) return U0 * std::sqrt(u);
  if (u == 0.0) return 0.0;
  if (u == 1.0) return U0;
  const double target = 2.0 * std::sqrt(u);
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve([&](double e) { return pendulum_action(e) - target; }, 0.0, 1.0,
                                                   boost::math::tools::eps_tolerance<double>(50), iters);
  return U0 * 0.5 * (r.first + r.second);
}

std::vector<double> adiabatic_survival(const EnergyDistribution &dist, const std::vector<double> &u_grid,
                                       AdiabaticMapping mapping) {
  std::vector<double> eta;
  eta.reserve(u_grid.size());
  for (double u : u_grid) {
    if (u < 0 || u > 1) throw Error(ErrorKind::domain, "U_low", "U_low/U0 must lie in [0, 1]");
    eta.push_back(dist.cdf(survival_threshold(u, dist.U0(), mapping)));
  }
  return eta;
}

namespace {

struct GaussFunctor : Eigen::DenseFunctor<double> {
  const std::vector<double> &x, &y;
  GaussFunctor(const std::vector<double> &x_, const std::vector<double> &y_)
      : DenseFunctor<double>(3, static_cast<int>(x_.size())), x(x_), y(y_) {}
  int operator()(const InputType &p, ValueType &f) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = (x[i] - p[1]) / p[2];
      f[static_cast<Eigen::Index>(i)] = p[0] * std::exp(-0.5 * t * t) - y[i];
    }
    return 0;
  }
};

} // namespace

Reconstruction reconstruct_energy_distribution(const std::vector<double> &u, const std::vector<double> &eta,
                                               double U0, AdiabaticMapping mapping) {
  if (u.size() != eta.size() || u.size() < 2)
    throw Error(ErrorKind::domain, "survival_data", "need at least two (U_low, eta) points");
  std::vector<std::size_t> order(u.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return u[a] < u[b]; });

  Reconstruction rec;
  const double tolerance = 0.02;
  std::vector<double> E, h;
  double running = -1.0;
  for (auto i : order) {
    double v = eta[i];
    if (v < running) {
      if (running - v > tolerance) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "eta decreases by %.3g at U_low/U0 = %.4g; clamped", running - v, u[i]);
        rec.warnings.emplace_back(buf);
      }
      v = running;
    }
    running = v;
    E.push_back(survival_threshold(u[i], U0, mapping));
    h.push_back(v);
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 1; i < E.size(); ++i) {
    const double dE = E[i] - E[i - 1];
    if (!(dE > 0)) continue;
    rec.energy.push_back(0.5 * (E[i] + E[i - 1]));
    rec.density.push_back((h[i] - h[i - 1]) / dE);
    xs.push_back(rec.energy.back() / U0);
    ys.push_back(rec.density.back() * U0);
  }
  if (xs.size() < 3) return rec;

  // moment estimates as the starting point, in units of U0
  double w = 0, m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    w += ys[i];
    m1 += ys[i] * xs[i];
    m2 += ys[i] * xs[i] * xs[i];
  }
  if (!(w > 0)) return rec;
  m1 /= w;
  Eigen::VectorXd p(3);
  p << *std::max_element(ys.begin(), ys.end()), m1, std::sqrt(std::max(m2 / w - m1 * m1, 1e-4));
  GaussFunctor f(xs, ys);
  Eigen::NumericalDiff<GaussFunctor> nd(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<GaussFunctor>> lm(nd);
  lm.minimize(p);
  if (!(std::abs(p[2]) > 0) || !std::isfinite(p[1])) {
    rec.warnings.emplace_back("Gaussian fit failed");
    return rec;
  }
  const double E0 = std::clamp(p[1], 0.0, 1.0) * U0;
  rec.fit = EnergyDistribution::gaussian(E0, std::abs(p[2]) * U0, U0);
  rec.fit_amplitude = p[0] / U0;
  return rec;
}

} // namespace wgm::dynamics
