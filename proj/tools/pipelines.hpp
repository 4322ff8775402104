#pragma once

#include "config.hpp"
#include "manifest.hpp"

#include "wgm/atomdata.hpp"
#include "wgm/cqed.hpp"
#include "wgm/stark.hpp"

#include <map>
#include <optional>
#include <string>

namespace wgm::cli {

struct RunContext {
  ExperimentConfig config;
  atomdata::SpeciesData species;
  int jobs = 1;
  std::optional<std::filesystem::path> histogram_file; // skip the Monte Carlo run
  /// Histograms already computed in this run, keyed by polarization.
  mutable std::map<std::string, dynamics::PositionHistogram> histograms;
  mutable std::vector<std::uint64_t> seeds;
};

/// Detunings at the trap minimum along a compensation power grid.
std::vector<stark::ScanPoint> center_scan(const RunContext &ctx, const BeamChoice &choice,
                                          const std::vector<double> &powers);
/// Monte Carlo histogram for a trap polarization, cached in the context.
const dynamics::PositionHistogram &histogram_for(const RunContext &ctx, const PolSpec &pol);
cqed::SpectrumSetup spectrum_setup(const RunContext &ctx, const BeamChoice &choice);

void run_shifts(const RunContext &ctx, OutputSet &out, const std::string &prefix = "");
void run_compensation_scan(const RunContext &ctx, OutputSet &out, const std::string &prefix = "");
void run_trap(const RunContext &ctx, OutputSet &out, const std::string &prefix = "");
void run_trajectories(const RunContext &ctx, OutputSet &out, const std::string &prefix = "");
void run_fluorescence(const RunContext &ctx, OutputSet &out, const std::string &prefix = "");
void run_transmission(const RunContext &ctx, OutputSet &out, const std::string &prefix = "");

/// Panels: 1b 3a 3b 4a 4b S2 S3 S4 S5, or "all".
void run_figure(const RunContext &ctx, const std::string &panel, OutputSet &out);
const std::vector<std::string> &figure_panels();

} // namespace wgm::cli
