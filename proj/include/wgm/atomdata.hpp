#pragma once

#include "wgm/half_int.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

/// Atomic structure data: fine-structure levels, dipole lines, hyperfine
/// constants and species-wide properties, loaded from a unit-annotated YAML
/// file (see docs in data/README.md). All stored quantities are SI.
namespace wgm::atomdata {

struct FineLevel {
  std::string key; // e.g. "5P3/2"
  int n = 0;
  int L = 0;
  HalfInt J;
  double energy = 0.0; // rad/s above the ground level

  bool operator==(const FineLevel &) const = default;
};

struct TransitionLine {
  std::string key;
  std::string lower;
  std::string upper;
  double reduced_dipole = 0.0; // |<upper||d||lower>|, C*m (symmetric convention)
  double omega = 0.0;          // rad/s, upper minus lower energy

  bool operator==(const TransitionLine &) const = default;
};

struct HfsConstants {
  double A = 0.0; // Hz
  double B = 0.0; // Hz

  bool operator==(const HfsConstants &) const = default;
};

struct SpeciesData {
  std::string name;
  std::string provenance;
  HalfInt I;
  double mass = 0.0;
  std::string ground_level;
  std::vector<FineLevel> levels;
  std::vector<TransitionLine> lines;
  std::map<std::string, HfsConstants> hfs;
  double saturation_intensity = 0.0; // W/m^2, cycling transition
  double gamma = 0.0;                // rad/s, dipole (amplitude) decay rate
  double surface_c3 = 0.0;           // J*m^3, atom-surface coefficient (0 = none)

  const FineLevel &level(const std::string &key) const;
  const FineLevel *find_level(const std::string &key) const;
  const TransitionLine &line(const std::string &key) const;
  const HfsConstants &hfs_for(const std::string &level_key) const;

  bool operator==(const SpeciesData &) const = default;
};

/// A line seen from one of its endpoints.
struct LineCoupling {
  const TransitionLine *line = nullptr;
  std::string partner;  // the other level
  HalfInt partner_J;
  double omega = 0.0;   // signed: positive when the partner lies above
};

SpeciesData load_species(const std::filesystem::path &path);
SpeciesData parse_species(const std::string &yaml_text, const std::string &source = "<string>");
/// Emits the schema with SI units; parse_species(serialize_species(s)) == s.
std::string serialize_species(const SpeciesData &species);

std::vector<LineCoupling> lines_coupling_to(const SpeciesData &species, const std::string &level_key);

} // namespace wgm::atomdata
