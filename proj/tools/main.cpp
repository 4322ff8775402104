#include "config.hpp"
#include "manifest.hpp"
#include "pipelines.hpp"

#include "wgm/error.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace wgm;

namespace {

int exit_code(ErrorKind k) {
  switch (k) {
  case ErrorKind::parse:
  case ErrorKind::validation:
  case ErrorKind::config: return 2;
  case ErrorKind::resonance:
  case ErrorKind::cutoff:
  case ErrorKind::singular:
  case ErrorKind::domain: return 3;
  case ErrorKind::io: return 4;
  }
  return 3;
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::io, p.string(), "cannot read");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Options {
  std::string config = "configs/default.yaml";
  std::string species;
  std::string output;
  std::string histogram;
  int jobs = 0;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_per_energy;
  std::optional<double> duration_us;
  std::string panel = "all";
};

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Light-shift compensated atom trap near a whispering-gallery-mode resonator"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("-c,--config", o.config, "experiment config (YAML with units)");
  app.add_option("--species", o.species, "override the species data file");
  app.add_option("-o,--output", o.output, "output directory (else $WGM_OUTPUT_DIR, else config)");
  app.add_option("-j,--jobs", o.jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  auto *validate = app.add_subcommand("validate", "check the config and species data");
  app.add_subcommand("shifts", "ground-state light shifts at the trap minimum");
  app.add_subcommand("compensation-scan", "transition detunings vs compensation power at the trap center");
  app.add_subcommand("trap", "trap minimum, depth, frequencies and potential cut");
  auto *traj = app.add_subcommand("trajectories", "Monte Carlo position histogram");
  auto *fluo = app.add_subcommand("fluorescence", "position-averaged fluorescence vs compensation power");
  auto *trans = app.add_subcommand("transmission", "position-averaged transmission spectra");
  auto *figs = app.add_subcommand("figures", "regenerate model curves per figure panel");
  for (auto *sub : {traj, fluo, trans, figs}) {
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--n-per-energy", o.n_per_energy, "trajectories per energy")->check(CLI::PositiveNumber);
    sub->add_option("--duration-us", o.duration_us, "trajectory duration in us")->check(CLI::PositiveNumber);
  }
  for (auto *sub : {fluo, trans, figs})
    sub->add_option("--histogram", o.histogram, "reuse a histogram file instead of running trajectories");
  std::string panels = "all";
  for (const auto &p : cli::figure_panels()) panels += ", " + p;
  figs->add_option("--panel", o.panel, "one of: " + panels);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const auto *sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  const auto t0 = std::chrono::steady_clock::now();

  try {
    cli::RunContext ctx;
    const auto violations = cli::load_config(o.config, ctx.config);
    auto &c = ctx.config;
    std::vector<cli::Violation> all = violations;
    if (!o.species.empty()) c.species_path = o.species;
    if (all.empty() || !o.species.empty()) {
      try {
        ctx.species = atomdata::load_species(c.species_path);
        if (!ctx.species.find_level(c.excited_level)) all.push_back({"excited_level", "unknown level " + c.excited_level});
        try {
          (void)ctx.species.line(c.compensation_line);
        } catch (const Error &) {
          all.push_back({"beams.compensation.line", "unknown line " + c.compensation_line});
        }
      } catch (const Error &e) {
        all.push_back({"species", e.what()});
      }
    }
    if (sub == validate) {
      for (const auto &v : all) std::printf("%s: %s\n", v.path.c_str(), v.message.c_str());
      if (all.empty()) std::printf("ok\n");
      return all.empty() ? 0 : 2;
    }
    if (!all.empty()) {
      for (const auto &v : all) std::fprintf(stderr, "config error: %s: %s\n", v.path.c_str(), v.message.c_str());
      return 2;
    }

    ctx.jobs = o.jobs > 0 ? o.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (o.seed) c.monte_carlo.seed = *o.seed;
    if (o.n_per_energy) c.monte_carlo.n_per_energy = *o.n_per_energy;
    if (o.duration_us) c.monte_carlo.duration = *o.duration_us * 1e-6;
    if (!o.histogram.empty()) ctx.histogram_file = o.histogram;

    std::filesystem::path out_dir = c.output_dir;
    if (const char *env = std::getenv("WGM_OUTPUT_DIR"); env && *env) out_dir = env;
    if (!o.output.empty()) out_dir = o.output;
    if (out_dir.is_relative() && o.output.empty() && !std::getenv("WGM_OUTPUT_DIR"))
      out_dir = c.source.parent_path() / out_dir;
    cli::OutputSet out(out_dir);

    if (cmd == "shifts") cli::run_shifts(ctx, out);
    else if (cmd == "compensation-scan") cli::run_compensation_scan(ctx, out);
    else if (cmd == "trap") cli::run_trap(ctx, out);
    else if (cmd == "trajectories") cli::run_trajectories(ctx, out);
    else if (cmd == "fluorescence") cli::run_fluorescence(ctx, out);
    else if (cmd == "transmission") cli::run_transmission(ctx, out);
    else if (cmd == "figures") cli::run_figure(ctx, o.panel, out);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.finish(cmd, slurp(o.config), ctx.seeds, wall);
    std::printf("%s: wrote %s (%.1f s)\n", cmd.c_str(), out.dir().string().c_str(), wall);
    return 0;
  } catch (const Error &e) {
    std::fprintf(stderr, "error [%s]: %s\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
