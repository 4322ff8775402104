#include "pipelines.hpp"

#include "svg.hpp"

#include "wgm/constants.hpp"
#include "wgm/cqed.hpp"
#include "wgm/dynamics.hpp"
#include "wgm/error.hpp"
#include "wgm/stark.hpp"
#include "wgm/trapfield.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wgm::cli {

using constants::two_pi;
using trapfield::BeamGeometry;
using trapfield::PolAxis;
using trapfield::Vec3;

namespace {

constexpr double MHz = two_pi * 1e6;

std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string pol_name(const PolSpec &p) {
  switch (p.axis) {
  case PolAxis::y: return "y";
  case PolAxis::zprime: return "zprime";
  case PolAxis::custom: break;
  }
  std::string s = "custom";
  for (int i = 0; i < 3; ++i) s += "_" + g9((*p.custom)[i].real()) + "_" + g9((*p.custom)[i].imag());
  return s;
}

std::vector<double> scaled(const std::vector<double> &v, double f) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [f](double x) { return x * f; });
  return out;
}

std::string state_label(const stark::HfsState &s) { return s.F.str() + "," + s.M.str(); }

// F'=4 lines from the stretched-closest ground sublevel, as drawn in the scan panels.
std::vector<Series> scan_series(const std::vector<stark::ScanPoint> &scan) {
  std::vector<Series> out;
  if (scan.empty()) return out;
  std::vector<double> P;
  for (const auto &p : scan) P.push_back(p.P_c * 1e6);
  const auto &first = scan.front().detunings;
  for (std::size_t k = 0; k < first.size(); ++k) {
    const auto &d = first[k];
    const HalfInt Mg = std::clamp(d.excited.M, -d.ground.F, d.ground.F);
    if (d.ground.M != Mg) continue;
    Series s;
    s.name = d.excited.F.twice() == 8 ? "F'=4 M'=" + d.excited.M.str() : "";
    s.dashed = d.excited.F.twice() != 8;
    s.x = P;
    for (const auto &p : scan) s.y.push_back(p.detunings[k].detuning / MHz);
    out.push_back(std::move(s));
  }
  return out;
}

void write_scan_outputs(const std::vector<stark::ScanPoint> &scan, OutputSet &out, const std::string &prefix,
                        const std::string &title) {
  out.write(prefix + "compensation_scan.csv", stark::scan_csv(scan));
  std::string cross = "F,M,Fprime,Mprime,P_c_uW\n";
  if (!scan.empty())
    for (const auto &d : scan.front().detunings) {
      const auto z = stark::zero_crossing(scan, d.ground, d.excited);
      cross += d.ground.F.str() + "," + d.ground.M.str() + "," + d.excited.F.str() + "," + d.excited.M.str() + "," +
               (z ? g9(*z * 1e6) : std::string("nan")) + "\n";
    }
  out.write(prefix + "crossings.csv", cross);
  if (const auto t = stark::tensor_minimum(scan, HalfInt::from_int(4)))
    out.write(prefix + "tensor_minimum.csv", "P_c_uW,spread_MHz,detuning_MHz\n" + g9(t->P_c * 1e6) + "," +
                                                  g9(t->spread / MHz) + "," + g9(t->detuning / MHz) + "\n");
  out.write(prefix + "compensation_scan.svg",
            render_svg({title, "compensation power (uW)", "detuning (MHz)", scan_series(scan)}));
}

} // namespace

struct CenterFields {
  BeamGeometry trap, comp;
  Vec3 r0;
  trapfield::QuantizationFrame frame;
};

namespace {

CenterFields center_fields(const RunContext &ctx, const BeamChoice &choice) {
  const auto &c = ctx.config;
  const auto trap = trap_beam(c, choice.pol);
  const trapfield::TrapPotential U(ctx.species, {trap}, c.surface_term);
  return {trap, compensation_beam(c, ctx.species, trap, choice.waist_ratio), U.minimum(),
          trapfield::QuantizationFrame::along(trap)};
}

} // namespace

std::vector<stark::ScanPoint> center_scan(const RunContext &ctx, const BeamChoice &choice,
                                          const std::vector<double> &powers) {
  const auto cf = center_fields(ctx, choice);
  stark::ScanSetup setup;
  setup.excited_level = ctx.config.excited_level;
  setup.fields = [&](double P) {
    auto comp = cf.comp;
    comp.power = P;
    auto fc = trapfield::field_at(comp, cf.r0, cf.frame);
    fc.guard.allowed_lines = {ctx.config.compensation_line};
    return std::vector<stark::FieldSpec>{trapfield::field_at(cf.trap, cf.r0, cf.frame), fc};
  };
  return stark::compensation_scan(ctx.species, setup, powers);
}

const dynamics::PositionHistogram &histogram_for(const RunContext &ctx, const PolSpec &pol) {
  const auto key = pol_name(pol);
  if (auto it = ctx.histograms.find(key); it != ctx.histograms.end()) return it->second;
  if (ctx.histogram_file) {
    std::ifstream in(*ctx.histogram_file);
    if (!in) throw Error(ErrorKind::io, ctx.histogram_file->string(), "cannot read histogram");
    std::stringstream ss;
    ss << in.rdbuf();
    return ctx.histograms[key] = dynamics::PositionHistogram::parse(ss.str());
  }
  const auto &c = ctx.config;
  const trapfield::TrapPotential U(ctx.species, {trap_beam(c, pol)}, c.surface_term);
  const double U0 = U.depth();
  auto opt = c.monte_carlo;
  opt.jobs = ctx.jobs;
  const auto dist = dynamics::EnergyDistribution::gaussian(c.energy_center * U0, c.energy_width * U0, U0);
  ctx.seeds.push_back(opt.seed);
  return ctx.histograms[key] = dynamics::position_distribution(U, dist, opt).histogram;
}

cqed::SpectrumSetup spectrum_setup(const RunContext &ctx, const BeamChoice &choice) {
  const auto &c = ctx.config;
  cqed::SpectrumSetup s;
  s.species = &ctx.species;
  s.excited_level = c.excited_level;
  s.trap = trap_beam(c, choice.pol);
  s.compensation = compensation_beam(c, ctx.species, s.trap, choice.waist_ratio);
  s.compensation_lines = {c.compensation_line};
  s.probe = probe_beam(c, s.trap);
  s.probe_saturation = c.probe_saturation;
  s.surface_term = c.surface_term;
  s.resonator = c.resonator;
  s.kappa0 = c.kappa0;
  s.kappa_ext = c.kappa_ext;
  s.Delta_rl_fluorescence = c.fluorescence_resonator_detuning;
  s.jobs = ctx.jobs;
  return s;
}

void run_shifts(const RunContext &ctx, OutputSet &out, const std::string &prefix) {
  std::string csv = "pol,f_refl,F,M,shift_MHz\n";
  std::vector<PolSpec> pols{{PolAxis::y, std::nullopt}, {PolAxis::zprime, std::nullopt}};
  if (ctx.config.trap_pol.axis == PolAxis::custom) pols.push_back(ctx.config.trap_pol);
  for (const auto &pol : pols) {
    const auto trap = trap_beam(ctx.config, pol);
    const trapfield::TrapPotential U(ctx.species, {trap}, ctx.config.surface_term);
    const Vec3 r0 = U.minimum();
    const auto frame = trapfield::QuantizationFrame::along(trap);
    const auto g = stark::ground_shift(ctx.species, {trapfield::field_at(trap, r0, frame)});
    const double f = trapfield::reflection_factor(trap, r0.x());
    for (std::size_t i = 0; i < g.states.size(); ++i)
      csv += pol_name(pol) + "," + g9(f) + "," + g.states[i].F.str() + "," + g.states[i].M.str() + "," +
             g9(g.shifts[i] / MHz) + "\n";
  }
  out.write(prefix + "ground_shifts.csv", csv);
}

void run_compensation_scan(const RunContext &ctx, OutputSet &out, const std::string &prefix) {
  const auto scan = center_scan(ctx, ctx.config.scan_beams, ctx.config.scan_powers);
  write_scan_outputs(scan, out, prefix, "Transition detunings at the trap center");
}

void run_trap(const RunContext &ctx, OutputSet &out, const std::string &prefix) {
  const auto &c = ctx.config;
  std::string summary = "pol,x_min_nm,depth_mK,f_x_kHz,f_y_kHz,f_z_kHz\n";
  std::vector<double> xs;
  for (double x = 20e-9; x <= 800e-9 + 1e-15; x += 2e-9) xs.push_back(x);
  Plot plot{"Trap potential and coupling along x", "distance from surface (nm)", "U (mK) / g (2pi MHz / 10)", {}};
  std::string cut = "x_nm";
  std::vector<std::vector<double>> cols;
  for (const auto axis : {PolAxis::y, PolAxis::zprime}) {
    const PolSpec pol{axis, std::nullopt};
    const trapfield::TrapPotential U(ctx.species, {trap_beam(c, pol)}, c.surface_term);
    const Vec3 r0 = U.minimum();
    const Vec3 w = trapfield::trap_frequencies(U, r0);
    summary += pol_name(pol) + "," + g9(r0.x() * 1e9) + "," + g9(U.depth() / constants::boltzmann * 1e3) + "," +
               g9(w.x() / two_pi / 1e3) + "," + g9(w.y() / two_pi / 1e3) + "," + g9(w.z() / two_pi / 1e3) + "\n";
    cut += ",U_" + pol_name(pol) + "_mK";
    Series s{"U " + pol_name(pol), scaled(xs, 1e9), {}, false};
    for (double x : xs) s.y.push_back(U.value({x, 0, 0}) / constants::boltzmann * 1e3);
    cols.push_back(s.y);
    plot.series.push_back(std::move(s));
  }
  cut += ",g_MHz\n";
  Series gs{"g/10", scaled(xs, 1e9), {}, true};
  std::vector<double> g;
  for (double x : xs) g.push_back(trapfield::coupling_strength(c.resonator, {x, 0, 0}) / MHz);
  for (double v : g) gs.y.push_back(v / 10.0);
  plot.series.push_back(gs);
  for (std::size_t i = 0; i < xs.size(); ++i)
    cut += g9(xs[i] * 1e9) + "," + g9(cols[0][i]) + "," + g9(cols[1][i]) + "," + g9(g[i]) + "\n";
  out.write(prefix + "trap.csv", summary);
  out.write(prefix + "potential_x.csv", cut);
  out.write(prefix + "potential_x.svg", render_svg(plot));
}

void run_trajectories(const RunContext &ctx, OutputSet &out, const std::string &prefix) {
  const auto &h = histogram_for(ctx, ctx.config.trap_pol);
  out.write(prefix + "histogram.txt", h.serialize());
}

void run_fluorescence(const RunContext &ctx, OutputSet &out, const std::string &prefix) {
  const auto &c = ctx.config;
  const auto sites = cqed::occupied_sites(histogram_for(ctx, c.fluorescence_beams.pol));
  const auto spec = cqed::averaged_fluorescence_spectrum(spectrum_setup(ctx, c.fluorescence_beams), sites,
                                                         c.fluorescence_powers);
  std::string csv = "P_c_uW,photons_per_s\n";
  for (std::size_t i = 0; i < spec.P_c.size(); ++i) csv += g9(spec.P_c[i] * 1e6) + "," + g9(spec.value[i]) + "\n";
  out.write(prefix + "fluorescence.csv", csv);
  out.write(prefix + "fluorescence_metrics.csv", "peak_uW,fwhm_uW,peak_photons_per_s\n" +
                                                     g9(spec.metrics.peak_x * 1e6) + "," +
                                                     g9(spec.metrics.fwhm * 1e6) + "," +
                                                     g9(spec.metrics.peak_value) + "\n");
  out.write(prefix + "fluorescence.svg",
            render_svg({"Position-averaged fluorescence", "compensation power (uW)", "photons / s",
                        {{"model", scaled(spec.P_c, 1e6), spec.value, false}}}));
}

namespace {

std::string spectrum_csv(const cqed::TransmissionSpectrum &t, const std::vector<double> &empty) {
  std::string csv = "detuning_MHz,T,T_empty\n";
  for (std::size_t i = 0; i < t.detuning.size(); ++i)
    csv += g9(t.detuning[i] / MHz) + "," + g9(t.T[i]) + "," + g9(empty[i]) + "\n";
  return csv;
}

std::vector<double> empty_resonator(const ExperimentConfig &c) {
  std::vector<double> T;
  for (double D : c.transmission_detunings) {
    cqed::CqedParams p;
    p.kappa0 = c.kappa0;
    p.kappa_ext = c.kappa_ext;
    p.Delta_rl = p.Delta_al = D;
    T.push_back(cqed::transmission(p));
  }
  return T;
}

void write_spectrum(const cqed::TransmissionSpectrum &t, const std::vector<double> &empty, OutputSet &out,
                    const std::string &name, const std::string &title) {
  out.write(name + ".csv", spectrum_csv(t, empty));
  out.write(name + ".svg", render_svg({title, "probe detuning (2pi MHz)", "normalized transmission",
                                       {{"atom", scaled(t.detuning, 1 / MHz), t.T, false},
                                        {"empty", scaled(t.detuning, 1 / MHz), empty, true}}}));
}

std::string power_tag(double P) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0fuW", P * 1e6);
  return buf;
}

} // namespace

void run_transmission(const RunContext &ctx, OutputSet &out, const std::string &prefix) {
  const auto &c = ctx.config;
  const auto sites = cqed::occupied_sites(histogram_for(ctx, c.transmission_beams.pol));
  const auto setup = spectrum_setup(ctx, c.transmission_beams);
  const auto scan = cqed::averaged_transmission_scan(setup, sites, c.transmission_powers, c.transmission_detunings);
  const auto empty = empty_resonator(c);
  std::string asym = "P_c_uW,asymmetry_MHz\n";
  for (const auto &t : scan.spectra) asym += g9(t.P_c * 1e6) + "," + g9(t.asymmetry / MHz) + "\n";
  out.write(prefix + "transmission_asymmetry.csv", asym);
  const auto &best = scan.spectra[scan.best];
  write_spectrum(best, empty, out, prefix + "transmission_best", "Averaged transmission, most symmetric P_c");
  const auto stats = cqed::coupling_statistics(c.resonator, sites);
  std::string summary = "best_P_c_uW,g_mean_MHz,g_std_MHz,minima_MHz\n" + g9(best.P_c * 1e6) + "," +
                        g9(stats.mean / MHz) + "," + g9(stats.std / MHz) + ",";
  for (std::size_t i = 0; i < best.minima.size(); ++i) summary += (i ? ";" : "") + g9(best.minima[i] / MHz);
  out.write(prefix + "transmission_summary.csv", summary + "\n");
  for (double P : c.transmission_extra_powers) {
    const auto extra = cqed::averaged_transmission_scan(setup, sites, {P}, c.transmission_detunings);
    write_spectrum(extra.spectra.front(), empty, out, prefix + "transmission_" + power_tag(P),
                   "Averaged transmission at " + power_tag(P));
  }
}

const std::vector<std::string> &figure_panels() {
  static const std::vector<std::string> panels{"1b", "3a", "3b", "4a", "4b", "S2", "S3", "S4", "S5"};
  return panels;
}

void run_figure(const RunContext &ctx, const std::string &panel, OutputSet &out) {
  const auto &c = ctx.config;
  const std::string prefix = "fig" + panel + "_";
  if (panel == "all") {
    for (const auto &p : figure_panels()) run_figure(ctx, p, out);
    run_shifts(ctx, out, "figall_");
    return;
  }
  if (panel == "1b") return run_trap(ctx, out, prefix);
  if (panel == "3a") return run_compensation_scan(ctx, out, prefix);
  if (panel == "3b") return run_fluorescence(ctx, out, prefix);
  if (panel == "4a") {
    auto reduced = ctx.config;
    reduced.transmission_extra_powers.clear();
    RunContext sub{reduced, ctx.species, ctx.jobs, ctx.histogram_file, {}, {}};
    sub.histograms = ctx.histograms;
    run_transmission(sub, out, prefix);
    ctx.histograms.insert(sub.histograms.begin(), sub.histograms.end());
    ctx.seeds.insert(ctx.seeds.end(), sub.seeds.begin(), sub.seeds.end());
    return;
  }
  if (panel == "4b" || panel == "S5") {
    const auto sites = cqed::occupied_sites(histogram_for(ctx, c.transmission_beams.pol));
    const auto setup = spectrum_setup(ctx, c.transmission_beams);
    const auto empty = empty_resonator(c);
    const std::vector<double> powers = panel == "4b" ? std::vector<double>{0.0} : c.transmission_extra_powers;
    for (double P : powers) {
      const auto scan = cqed::averaged_transmission_scan(setup, sites, {P}, c.transmission_detunings);
      write_spectrum(scan.spectra.front(), empty, out, prefix + "transmission_" + power_tag(P),
                     "Averaged transmission at " + power_tag(P));
    }
    return;
  }
  if (panel == "S2") {
    const trapfield::TrapPotential U(ctx.species, {trap_beam(c, c.trap_pol)}, c.surface_term);
    const double U0 = U.depth();
    const auto dist = dynamics::EnergyDistribution::gaussian(c.energy_center * U0, c.energy_width * U0, U0);
    const auto eta = dynamics::adiabatic_survival(dist, c.lowering_grid, c.mapping);
    const auto rec = dynamics::reconstruct_energy_distribution(c.lowering_grid, eta, U0, c.mapping);
    std::string csv = "u,survival\n";
    for (std::size_t i = 0; i < eta.size(); ++i) csv += g9(c.lowering_grid[i]) + "," + g9(eta[i]) + "\n";
    out.write(prefix + "survival.csv", csv);
    std::string dens = "E_over_U0,density,fit\n";
    std::vector<double> e, d, f;
    for (std::size_t i = 0; i < rec.energy.size(); ++i) {
      const double fit = rec.fit ? rec.fit_amplitude * rec.fit->pdf(rec.energy[i]) * U0 : NAN;
      e.push_back(rec.energy[i] / U0);
      d.push_back(rec.density[i] * U0);
      f.push_back(fit);
      dens += g9(e.back()) + "," + g9(d.back()) + "," + g9(fit) + "\n";
    }
    out.write(prefix + "energy_distribution.csv", dens);
    if (rec.fit)
      out.write(prefix + "energy_fit.csv", "E0_over_U0,sigma_over_U0\n" + g9(rec.fit->E0() / U0) + "," +
                                               g9(rec.fit->sigma() / U0) + "\n");
    out.write(prefix + "survival.svg", render_svg({"Adiabatic lowering forward model", "U_low / U0", "survival",
                                                   {{"model", c.lowering_grid, eta, false}}}));
    out.write(prefix + "energy_distribution.svg",
              render_svg({"Reconstructed energy distribution", "E / U0", "density (1/U0)",
                          {{"finite difference", e, d, false}, {"Gaussian fit", e, f, true}}}));
    return;
  }
  if (panel == "S3") {
    const auto scan = center_scan(ctx, c.scan_beams, c.scan_powers);
    std::vector<double> picks{0.0};
    const stark::HfsState g{HalfInt::from_int(3), HalfInt::from_int(3)}, e{HalfInt::from_int(4), HalfInt::from_int(4)};
    if (const auto z = stark::zero_crossing(scan, g, e)) picks.push_back(*z);
    if (const auto t = stark::tensor_minimum(scan, HalfInt::from_int(4))) picks.push_back(t->P_c);
    const auto snap = center_scan(ctx, c.scan_beams, picks);
    std::string csv = "P_c_uW,F,M,Fprime,Mprime,detuning_MHz\n";
    Plot plot{"Detunings at three compensation powers", "excited M'", "detuning (MHz)", {}};
    for (const auto &p : snap) {
      Series s{power_tag(p.P_c), {}, {}, false};
      for (const auto &d : p.detunings) {
        csv += g9(p.P_c * 1e6) + "," + state_label(d.ground) + "," + state_label(d.excited) + "," +
               g9(d.detuning / MHz) + "\n";
        if (d.excited.F.twice() == 8 && d.ground.M == std::clamp(d.excited.M, -d.ground.F, d.ground.F)) {
          s.x.push_back(d.excited.M.value());
          s.y.push_back(d.detuning / MHz);
        }
      }
      plot.series.push_back(std::move(s));
    }
    out.write(prefix + "snapshots.csv", csv);
    out.write(prefix + "snapshots.svg", render_svg(plot));
    return;
  }
  if (panel == "S4") {
    const auto scan = center_scan(ctx, c.fluorescence_beams, c.scan_powers);
    std::string csv = "P_c_uW,level,F,M,shift_MHz\n";
    Plot plot{"Ground and F'=4 light shifts, elliptic light, w_c/w_trap from config", "compensation power (uW)",
              "light shift (MHz)", {}};
    std::map<std::string, Series> lines;
    for (const auto &p : scan)
      for (const auto *t : {&p.ground, &p.excited})
        for (const auto &s : t->basis) {
          if (t == &p.excited && s.F.twice() != 8) continue;
          if (t == &p.ground && s.F.twice() != 6) continue;
          const double v = t->shift(s) / MHz;
          csv += g9(p.P_c * 1e6) + "," + t->level + "," + state_label(s) + "," + g9(v) + "\n";
          auto &ser = lines[t->level + " " + state_label(s)];
          ser.dashed = t == &p.ground;
          ser.x.push_back(p.P_c * 1e6);
          ser.y.push_back(v);
        }
    for (auto &[name, s] : lines) plot.series.push_back(std::move(s));
    out.write(prefix + "shifts.csv", csv);
    out.write(prefix + "shifts.svg", render_svg(plot));
    return;
  }
  throw Error(ErrorKind::config, "panel", "unknown panel '" + panel + "'");
}

} // namespace wgm::cli
