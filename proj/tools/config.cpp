#include "config.hpp"

#include "wgm/constants.hpp"
#include "wgm/error.hpp"
#include "wgm/units.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace wgm::cli {

using units::Dimension;

namespace {

class Reader {
public:
  explicit Reader(std::vector<Violation> &out) : out_(out) {}

  void fail(const std::string &path, const std::string &msg) { out_.push_back({path, msg}); }

  YAML::Node child(const YAML::Node &n, const std::string &key) const {
    if (!n || !n.IsMap()) return YAML::Node();
    return n[key];
  }

  void quantity(const YAML::Node &n, const std::string &key, const std::string &path, Dimension d, double &dst,
                bool required = false) {
    const auto v = child(n, key);
    if (!v) {
      if (required) fail(path, "missing");
      return;
    }
    try {
      dst = units::parse_quantity(v.as<std::string>(), d, path);
    } catch (const Error &e) {
      fail(path, e.what());
    } catch (const YAML::Exception &) {
      fail(path, "expected a scalar");
    }
  }

  template <class T> void scalar(const YAML::Node &n, const std::string &key, const std::string &path, T &dst) {
    const auto v = child(n, key);
    if (!v) return;
    try {
      dst = v.as<T>();
    } catch (const YAML::Exception &) {
      fail(path, "malformed value");
    }
  }

  /// Either a list of quantities or {start, stop, step}.
  void grid(const YAML::Node &n, const std::string &key, const std::string &path, Dimension d,
            std::vector<double> &dst) {
    const auto v = child(n, key);
    if (!v) return;
    std::vector<double> out;
    if (v.IsSequence()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        double x = 0.0;
        const std::string p = path + "[" + std::to_string(i) + "]";
        try {
          x = units::parse_quantity(v[i].as<std::string>(), d, p);
        } catch (const Error &e) {
          fail(p, e.what());
          return;
        }
        out.push_back(x);
      }
    } else if (v.IsMap()) {
      double start = NAN, stop = NAN, step = NAN;
      quantity(v, "start", path + ".start", d, start, true);
      quantity(v, "stop", path + ".stop", d, stop, true);
      quantity(v, "step", path + ".step", d, step, true);
      if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step)) return;
      if (!(step > 0)) {
        fail(path + ".step", "must be positive");
        return;
      }
      const auto n_steps = static_cast<long>(std::floor((stop - start) / step * (1 + 1e-12) + 1e-9));
      for (long i = 0; i <= n_steps; ++i) out.push_back(start + static_cast<double>(i) * step);
    } else {
      fail(path, "expected a list or {start, stop, step}");
      return;
    }
    dst = std::move(out);
  }

  void pol(const YAML::Node &n, const std::string &key, const std::string &path, PolSpec &dst) {
    const auto v = child(n, key);
    if (!v) return;
    if (v.IsScalar()) {
      const auto s = v.as<std::string>();
      if (s == "y") dst = {trapfield::PolAxis::y, std::nullopt};
      else if (s == "zprime") dst = {trapfield::PolAxis::zprime, std::nullopt};
      else fail(path, "unknown polarization '" + s + "' (y, zprime or [[re, im] x3])");
      return;
    }
    if (!v.IsSequence() || v.size() != 3) {
      fail(path, "expected y, zprime or three [re, im] pairs");
      return;
    }
    Eigen::Vector3cd u;
    try {
      for (int i = 0; i < 3; ++i) u[i] = {v[i][0].as<double>(), v[i][1].as<double>()};
    } catch (const YAML::Exception &) {
      fail(path, "expected three [re, im] pairs");
      return;
    }
    if (std::abs(u.norm() - 1.0) > 0.05) {
      fail(path, "polarization norm deviates from 1 by more than 5%");
      return;
    }
    dst = {trapfield::PolAxis::custom, u.normalized()};
  }

  void positive(double v, const std::string &path) {
    if (!(v > 0)) fail(path, "must be positive");
  }
  void nonnegative(double v, const std::string &path) {
    if (!(v >= 0)) fail(path, "must be non-negative");
  }
  void monotone(const std::vector<double> &g, const std::string &path, bool required = true) {
    if (g.empty()) {
      if (required) fail(path, "grid is empty");
      return;
    }
    for (std::size_t i = 1; i < g.size(); ++i)
      if (!(g[i] > g[i - 1])) {
        fail(path, "grid must be strictly increasing");
        return;
      }
  }

private:
  std::vector<Violation> &out_;
};

void beam_choice(Reader &r, const YAML::Node &n, const std::string &path, BeamChoice &dst) {
  r.pol(n, "pol", path + ".pol", dst.pol);
  r.scalar(n, "waist_ratio", path + ".waist_ratio", dst.waist_ratio);
  r.positive(dst.waist_ratio, path + ".waist_ratio");
}

} // namespace

std::vector<Violation> parse_config(const std::string &text, const std::filesystem::path &source,
                                    ExperimentConfig &c) {
  std::vector<Violation> out;
  Reader r(out);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception &e) {
    out.push_back({"", std::string("YAML syntax: ") + e.what()});
    return out;
  }
  if (!root.IsMap()) {
    out.push_back({"", "top level must be a mapping"});
    return out;
  }
  c = ExperimentConfig{};
  c.source = source;
  const auto base = source.empty() ? std::filesystem::path(".") : source.parent_path();

  std::string species;
  r.scalar(root, "species", "species", species);
  if (species.empty()) r.fail("species", "missing");
  else {
    c.species_path = std::filesystem::path(species).is_absolute() ? std::filesystem::path(species) : base / species;
    if (!std::filesystem::exists(c.species_path)) r.fail("species", "file not found: " + c.species_path.string());
  }
  r.scalar(root, "excited_level", "excited_level", c.excited_level);
  std::string out_dir = "out";
  r.scalar(root, "output_dir", "output_dir", out_dir);
  c.output_dir = out_dir;
  r.scalar(root, "surface_term", "surface_term", c.surface_term);

  const auto beams = r.child(root, "beams");
  const auto trap = r.child(beams, "trap");
  if (!trap) r.fail("beams.trap", "missing");
  r.quantity(trap, "power", "beams.trap.power", Dimension::power, c.trap.power, true);
  r.quantity(trap, "waist", "beams.trap.waist", Dimension::length, c.trap.waist);
  r.quantity(trap, "wavelength", "beams.trap.wavelength", Dimension::length, c.trap.wavelength, true);
  r.quantity(trap, "incidence_angle", "beams.trap.incidence_angle", Dimension::angle, c.trap.theta);
  r.scalar(trap, "refractive_index", "beams.trap.refractive_index", c.trap.refractive_index);
  r.quantity(trap, "focus_offset", "beams.trap.focus_offset", Dimension::length, c.trap.focus_offset);
  r.pol(trap, "pol", "beams.trap.pol", c.trap_pol);
  r.positive(c.trap.power, "beams.trap.power");
  r.positive(c.trap.waist, "beams.trap.waist");
  r.positive(c.trap.wavelength, "beams.trap.wavelength");
  if (!(c.trap.refractive_index > 1)) r.fail("beams.trap.refractive_index", "must exceed 1");
  if (!(c.trap.theta >= 0 && c.trap.theta < constants::pi / 2))
    r.fail("beams.trap.incidence_angle", "must lie in [0, 90) deg");

  const auto comp = r.child(beams, "compensation");
  if (!comp) r.fail("beams.compensation", "missing");
  r.scalar(comp, "line", "beams.compensation.line", c.compensation_line);
  r.quantity(comp, "detuning", "beams.compensation.detuning", Dimension::angular_frequency,
             c.compensation_detuning, true);

  const auto probe = r.child(beams, "probe");
  r.quantity(probe, "wavelength", "beams.probe.wavelength", Dimension::length, c.probe_wavelength);
  r.scalar(probe, "saturation", "beams.probe.saturation", c.probe_saturation);
  r.nonnegative(c.probe_saturation, "beams.probe.saturation");

  const auto res = r.child(root, "resonator");
  if (!res) r.fail("resonator", "missing");
  r.quantity(res, "radius", "resonator.radius", Dimension::length, c.resonator.radius);
  r.scalar(res, "refractive_index", "resonator.refractive_index", c.resonator.refractive_index);
  r.quantity(res, "wavelength", "resonator.wavelength", Dimension::length, c.resonator.wavelength);
  r.quantity(res, "g_max", "resonator.g_max", Dimension::angular_frequency, c.resonator.g_max, true);
  r.quantity(res, "axial_extent", "resonator.axial_extent", Dimension::length, c.resonator.axial_extent);
  std::string decay = "effective_index";
  r.scalar(res, "decay_model", "resonator.decay_model", decay);
  if (decay == "bulk_index") c.resonator.decay = trapfield::DecayModel::bulk_index;
  else if (decay != "effective_index") r.fail("resonator.decay_model", "expected bulk_index or effective_index");
  if (r.child(res, "decay_length")) {
    double L = 0.0;
    r.quantity(res, "decay_length", "resonator.decay_length", Dimension::length, L);
    r.positive(L, "resonator.decay_length");
    c.resonator.decay_length_override = L;
  }
  r.positive(c.resonator.g_max, "resonator.g_max");
  r.positive(c.resonator.radius, "resonator.radius");
  r.positive(c.resonator.axial_extent, "resonator.axial_extent");
  r.quantity(res, "kappa0", "resonator.kappa0", Dimension::angular_frequency, c.kappa0, true);
  r.quantity(res, "kappa_ext", "resonator.kappa_ext", Dimension::angular_frequency, c.kappa_ext, true);
  r.nonnegative(c.kappa0, "resonator.kappa0");
  r.nonnegative(c.kappa_ext, "resonator.kappa_ext");

  const auto scan = r.child(root, "compensation_scan");
  beam_choice(r, scan, "compensation_scan", c.scan_beams);
  r.grid(scan, "powers", "compensation_scan.powers", Dimension::power, c.scan_powers);
  r.monotone(c.scan_powers, "compensation_scan.powers");
  if (!c.scan_powers.empty() && c.scan_powers.front() < 0) r.fail("compensation_scan.powers", "negative power");

  const auto fl = r.child(root, "fluorescence");
  beam_choice(r, fl, "fluorescence", c.fluorescence_beams);
  r.grid(fl, "powers", "fluorescence.powers", Dimension::power, c.fluorescence_powers);
  r.monotone(c.fluorescence_powers, "fluorescence.powers");
  if (!c.fluorescence_powers.empty() && c.fluorescence_powers.front() < 0)
    r.fail("fluorescence.powers", "negative power");
  r.quantity(fl, "resonator_detuning", "fluorescence.resonator_detuning", Dimension::angular_frequency,
             c.fluorescence_resonator_detuning);

  const auto tr = r.child(root, "transmission");
  beam_choice(r, tr, "transmission", c.transmission_beams);
  r.grid(tr, "powers", "transmission.powers", Dimension::power, c.transmission_powers);
  r.monotone(c.transmission_powers, "transmission.powers");
  if (!c.transmission_powers.empty() && c.transmission_powers.front() < 0)
    r.fail("transmission.powers", "negative power");
  r.grid(tr, "detunings", "transmission.detunings", Dimension::angular_frequency, c.transmission_detunings);
  r.monotone(c.transmission_detunings, "transmission.detunings");
  if (c.transmission_detunings.size() >= 3) {
    const auto &d = c.transmission_detunings;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (std::abs(d[i] + d[d.size() - 1 - i]) > 1e-6 * std::abs(d.back())) {
        r.fail("transmission.detunings", "grid must be symmetric about zero");
        break;
      }
  }
  r.grid(tr, "extra_powers", "transmission.extra_powers", Dimension::power, c.transmission_extra_powers);

  const auto mc = r.child(root, "monte_carlo");
  auto &o = c.monte_carlo;
  r.scalar(mc, "n_per_energy", "monte_carlo.n_per_energy", o.n_per_energy);
  r.scalar(mc, "n_energies", "monte_carlo.n_energies", o.n_energies);
  r.scalar(mc, "energy_min", "monte_carlo.energy_min", o.e_lo);
  r.scalar(mc, "energy_max", "monte_carlo.energy_max", o.e_hi);
  r.quantity(mc, "duration", "monte_carlo.duration", Dimension::time, o.duration);
  r.quantity(mc, "time_step", "monte_carlo.time_step", Dimension::time, o.dt);
  r.scalar(mc, "seed", "monte_carlo.seed", o.seed);
  r.scalar(mc, "energy_center", "monte_carlo.energy_center", c.energy_center);
  r.scalar(mc, "energy_width", "monte_carlo.energy_width", c.energy_width);
  std::string sampling = "uniform", integrator = "pefrl";
  r.scalar(mc, "sampling", "monte_carlo.sampling", sampling);
  r.scalar(mc, "integrator", "monte_carlo.integrator", integrator);
  if (sampling == "microcanonical") o.sampling = dynamics::Sampling::microcanonical;
  else if (sampling != "uniform") r.fail("monte_carlo.sampling", "expected uniform or microcanonical");
  if (integrator == "verlet") o.method = dynamics::Integrator::verlet;
  else if (integrator != "pefrl") r.fail("monte_carlo.integrator", "expected pefrl or verlet");
  if (const auto bin = r.child(mc, "bin")) {
    if (!bin.IsSequence() || bin.size() != 3) r.fail("monte_carlo.bin", "expected three lengths");
    else
      for (int i = 0; i < 3; ++i) {
        const std::string p = "monte_carlo.bin[" + std::to_string(i) + "]";
        try {
          o.bin[i] = units::parse_quantity(bin[i].as<std::string>(), Dimension::length, p);
          r.positive(o.bin[i], p);
        } catch (const Error &e) {
          r.fail(p, e.what());
        }
      }
  }
  if (const auto shape = r.child(mc, "shape")) {
    try {
      const auto s = shape.as<std::vector<int>>();
      if (s.size() != 3 || *std::min_element(s.begin(), s.end()) < 1) r.fail("monte_carlo.shape", "expected three positive counts");
      else o.shape = {s[0], s[1], s[2]};
    } catch (const YAML::Exception &) {
      r.fail("monte_carlo.shape", "expected three integers");
    }
  }
  if (o.n_per_energy < 1) r.fail("monte_carlo.n_per_energy", "must be at least 1");
  if (o.n_energies < 1) r.fail("monte_carlo.n_energies", "must be at least 1");
  if (!(0 < o.e_lo && o.e_lo <= o.e_hi && o.e_hi < 1))
    r.fail("monte_carlo.energy_min", "need 0 < energy_min <= energy_max < 1");
  r.positive(o.duration, "monte_carlo.duration");
  r.nonnegative(o.dt, "monte_carlo.time_step");
  r.positive(c.energy_width, "monte_carlo.energy_width");
  if (!(c.energy_center > 0 && c.energy_center < 1)) r.fail("monte_carlo.energy_center", "must lie in (0, 1)");

  const auto low = r.child(root, "lowering");
  std::string mapping = "harmonic";
  r.scalar(low, "mapping", "lowering.mapping", mapping);
  if (mapping == "action1d") c.mapping = dynamics::AdiabaticMapping::action1d;
  else if (mapping != "harmonic") r.fail("lowering.mapping", "expected harmonic or action1d");
  r.grid(low, "depths", "lowering.depths", Dimension::dimensionless, c.lowering_grid);
  r.monotone(c.lowering_grid, "lowering.depths");
  for (double u : c.lowering_grid)
    if (!(u >= 0 && u <= 1)) {
      r.fail("lowering.depths", "fractions must lie in [0, 1]");
      break;
    }
  return out;
}

std::vector<Violation> load_config(const std::filesystem::path &path, ExperimentConfig &config) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, path.string(), "cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path, config);
}

trapfield::BeamGeometry trap_beam(const ExperimentConfig &c, const PolSpec &pol) {
  auto b = c.trap;
  b.pol_axis = pol.axis;
  b.custom_pol = pol.custom;
  return b;
}

trapfield::BeamGeometry compensation_beam(const ExperimentConfig &c, const atomdata::SpeciesData &species,
                                          const trapfield::BeamGeometry &trap, double waist_ratio) {
  auto b = trap;
  b.power = 0.0;
  b.waist = trap.waist * waist_ratio;
  const double omega = species.line(c.compensation_line).omega + c.compensation_detuning;
  if (!(omega > 0)) throw Error(ErrorKind::config, "beams.compensation.detuning", "non-positive frequency");
  b.wavelength = constants::two_pi * constants::speed_of_light / omega;
  return b;
}

trapfield::BeamGeometry probe_beam(const ExperimentConfig &c, const trapfield::BeamGeometry &trap) {
  auto b = trap;
  b.power = 0.0;
  b.wavelength = c.probe_wavelength;
  return b;
}

} // namespace wgm::cli
