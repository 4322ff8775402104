#pragma once

#include "wgm/trapfield.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace wgm::dynamics {

using trapfield::Potential;
using trapfield::Vec3;

/// Energies are measured from the bottom of the well.
class EnergyDistribution {
public:
  /// Gaussian clipped to [0, U0] and renormalized there.
  static EnergyDistribution gaussian(double E0, double sigma, double U0);
  /// Piecewise-constant density on consecutive bins [edges[i], edges[i+1]).
  static EnergyDistribution empirical(std::vector<double> edges, std::vector<double> density, double U0);

  double pdf(double E) const;
  double cdf(double E) const;
  double U0() const { return U0_; }
  bool is_gaussian() const { return gaussian_; }
  double E0() const { return E0_; }
  double sigma() const { return sigma_; }
  const std::vector<double> &edges() const { return edges_; }
  const std::vector<double> &density() const { return density_; }

private:
  bool gaussian_ = true;
  double E0_ = 0.0, sigma_ = 0.0, U0_ = 0.0, norm_ = 1.0;
  std::vector<double> edges_, density_;
};

enum class Sampling {
  uniform,       // uniform over the allowed region (default)
  microcanonical // weight sqrt(E - U), the 3D phase-space density
};

struct InitialCondition {
  Vec3 r;
  Vec3 v;
};

/// Deterministic per-stream seed from a master seed (SplitMix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// E above the minimum, 0 < E < depth. Position by rejection in the bounding
/// box of the allowed region, isotropic velocity with |v| from energy
/// conservation.
InitialCondition sample_initial_conditions(double E, const Potential &U, std::uint64_t seed,
                                           Sampling mode = Sampling::uniform);

enum class Integrator {
  verlet, // velocity Verlet, 2nd order
  pefrl   // position-extended Forest-Ruth-like, 4th order
};

struct IntegratorOptions {
  Integrator method = Integrator::pefrl;
  double dt = 0.0;       // s
  double duration = 0.0; // s
  int sample_every = 1;  // store every n-th step in the Trajectory
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<double> total_energy; // J, zero at infinity
  bool escaped = false;
  double max_relative_drift = 0.0; // max |E(t)-E(0)|/|E(0)| over all steps
};

Trajectory integrate_trajectory(const Potential &U, const InitialCondition &ic, const IntegratorOptions &opt);

/// Same integration without storage; `visit(r)` is called after every step.
/// Returns false if the atom left the modeled volume.
template <class Visit>
bool propagate(const Potential &U, InitialCondition s, const IntegratorOptions &opt, Visit &&visit,
               double *max_drift = nullptr);

/// Occupancy grid with integer counts until normalized.
struct PositionHistogram {
  Vec3 origin = Vec3::Zero(); // lower corner, m
  Vec3 bin = Vec3(20e-9, 100e-9, 100e-9);
  std::array<int, 3> shape{20, 40, 40};
  std::vector<double> mass; // probability per bin, x fastest... see index()

  static PositionHistogram centered(const Vec3 &center, const Vec3 &bin, const std::array<int, 3> &shape);
  std::size_t size() const { return static_cast<std::size_t>(shape[0]) * shape[1] * shape[2]; }
  /// Flat index of (i, j, k), k fastest.
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k;
  }
  std::optional<std::size_t> locate(const Vec3 &r) const;
  Vec3 center_of(std::size_t flat) const;
  double total() const;
  double volume() const { return bin.prod() * static_cast<double>(size()); }

  /// Text format: header lines starting with '#' then "i j k mass" rows for
  /// nonzero bins.
  std::string serialize() const;
  static PositionHistogram parse(const std::string &text);
};

struct DistributionOptions {
  int n_per_energy = 500;
  int n_energies = 25;
  double e_lo = 0.05, e_hi = 0.95; // fractions of the depth
  double duration = 200e-6;
  double dt = 0.0; // 0 -> T_x/50
  Integrator method = Integrator::pefrl;
  Sampling sampling = Sampling::uniform;
  std::uint64_t seed = 1;
  int jobs = 1;
  Vec3 bin = Vec3(20e-9, 100e-9, 100e-9);
  std::array<int, 3> shape{20, 40, 40};
};

struct DistributionResult {
  PositionHistogram histogram;               // energy-weighted, normalized
  std::vector<double> energies;              // grid, J above the minimum
  std::vector<double> weights;               // normalized weights of the grid
  std::vector<PositionHistogram> per_energy; // each normalized
  std::size_t escaped = 0;
  double outside_fraction = 0.0; // samples outside the histogram volume
  double max_relative_drift = 0.0;
};

/// Energy-averaged position histogram from classical trajectories.
DistributionResult position_distribution(const Potential &U, const EnergyDistribution &dist,
                                         const DistributionOptions &opt);

/// Histogram of many trajectories at one energy.
PositionHistogram fixed_energy_histogram(const Potential &U, double E, const DistributionOptions &opt,
                                         std::uint64_t stream, std::size_t *escaped = nullptr,
                                         double *outside = nullptr, double *drift = nullptr);

/// Energy mapping used for adiabatic lowering of U0 to U_low.
enum class AdiabaticMapping {
  harmonic, // E' = E sqrt(U_low/U0)
  action1d  // action conservation in a -U0 cos^2 well
};

/// Threshold energy (at full depth) below which an atom survives lowering to
/// u = U_low/U0.
double survival_threshold(double u, double U0, AdiabaticMapping mapping = AdiabaticMapping::harmonic);

/// eta(u) for each u = U_low/U0 in the grid.
std::vector<double> adiabatic_survival(const EnergyDistribution &dist, const std::vector<double> &u_grid,
                                       AdiabaticMapping mapping = AdiabaticMapping::harmonic);

struct Reconstruction {
  std::vector<double> energy;  // bin centers, J
  std::vector<double> density; // finite-difference density, 1/J
  std::optional<EnergyDistribution> fit;
  double fit_amplitude = 0.0;
  std::vector<std::string> warnings;
};

/// Inverts survival data (u_i, eta_i) into an energy density plus a Gaussian fit.
Reconstruction reconstruct_energy_distribution(const std::vector<double> &u, const std::vector<double> &eta,
                                               double U0, AdiabaticMapping mapping = AdiabaticMapping::harmonic);

} // namespace wgm::dynamics

#include "wgm/dynamics_impl.hpp"
