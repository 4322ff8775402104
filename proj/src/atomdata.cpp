#include "wgm/atomdata.hpp"

#include "wgm/error.hpp"
#include "wgm/units.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace wgm::atomdata {

using units::Dimension;

const FineLevel *SpeciesData::find_level(const std::string &key) const {
  for (const auto &l : levels)
    if (l.key == key) return &l;
  return nullptr;
}

const FineLevel &SpeciesData::level(const std::string &key) const {
  if (const auto *l = find_level(key)) return *l;
  throw Error(ErrorKind::domain, "level." + key, "unknown level");
}

const TransitionLine &SpeciesData::line(const std::string &key) const {
  for (const auto &l : lines)
    if (l.key == key) return l;
  throw Error(ErrorKind::domain, "line." + key, "unknown line");
}

const HfsConstants &SpeciesData::hfs_for(const std::string &level_key) const {
  const auto it = hfs.find(level_key);
  if (it == hfs.end())
    throw Error(ErrorKind::domain, "hfs." + level_key, "no hyperfine constants for level");
  return it->second;
}

namespace {

[[noreturn]] void invalid(const std::string &path, const std::string &msg) {
  throw Error(ErrorKind::validation, path, msg);
}

const YAML::Node require(const YAML::Node &parent, const std::string &key, const std::string &path) {
  const YAML::Node n = parent[key];
  if (!n) throw Error(ErrorKind::parse, path + "." + key, "missing field");
  return n;
}

std::string scalar(const YAML::Node &n, const std::string &path) {
  if (!n.IsScalar()) throw Error(ErrorKind::parse, path, "expected a scalar");
  return n.as<std::string>();
}

double quantity(const YAML::Node &parent, const std::string &key, Dimension d, const std::string &path) {
  return units::parse_quantity(scalar(require(parent, key, path), path + "." + key), d, path + "." + key);
}

int integer(const YAML::Node &parent, const std::string &key, const std::string &path) {
  const std::string text = scalar(require(parent, key, path), path + "." + key);
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception &) {
  }
  throw Error(ErrorKind::parse, path + "." + key, "expected an integer, got '" + text + "'");
}

HalfInt half_int(const YAML::Node &parent, const std::string &key, const std::string &path) {
  const std::string text = scalar(require(parent, key, path), path + "." + key);
  if (const auto h = HalfInt::parse(text)) return *h;
  invalid(path + "." + key, "not a half-integer quantum number: '" + text + "'");
}

void validate(const SpeciesData &s) {
  if (s.I.twice() < 0) invalid("species.nuclear_spin", "must be >= 0");
  if (!(s.mass > 0)) invalid("species.mass", "must be positive");
  if (!(s.gamma > 0)) invalid("species.dipole_decay_rate", "must be positive");
  if (!(s.saturation_intensity > 0)) invalid("species.saturation_intensity", "must be positive");
  if (s.surface_c3 < 0) invalid("species.surface_c3", "must be >= 0");

  std::set<std::string> keys;
  for (const auto &l : s.levels) {
    const std::string path = "level." + l.key;
    if (!keys.insert(l.key).second) invalid(path, "duplicate level");
    if (l.L < 0) invalid(path + ".L", "must be >= 0");
    if (l.n <= l.L) invalid(path + ".n", "principal quantum number must exceed L");
    // J = L +- 1/2 for a single valence electron
    const int twoL = 2 * l.L;
    if (l.J.twice() != twoL + 1 && l.J.twice() != std::abs(twoL - 1))
      invalid(path + ".J", "J must be |L-1/2| or L+1/2");
    if (l.energy < 0) invalid(path + ".energy", "must be >= 0 relative to the ground level");
  }
  const FineLevel *ground = s.find_level(s.ground_level);
  if (!ground) invalid("species.ground_level", "unknown level '" + s.ground_level + "'");
  if (ground->energy != 0.0) invalid("level." + ground->key + ".energy", "ground level energy must be exactly 0");

  std::set<std::string> line_keys;
  for (const auto &ln : s.lines) {
    const std::string path = "line." + ln.key;
    if (!line_keys.insert(ln.key).second) invalid(path, "duplicate line");
    const FineLevel *lo = s.find_level(ln.lower);
    const FineLevel *up = s.find_level(ln.upper);
    if (!lo) invalid(path + ".lower", "dangling reference to level '" + ln.lower + "'");
    if (!up) invalid(path + ".upper", "dangling reference to level '" + ln.upper + "'");
    if (!(ln.reduced_dipole > 0)) invalid(path + ".reduced_dipole", "matrix element must be positive");
    if (!(ln.omega > 0)) invalid(path, "upper level must lie above lower level");
    if (std::abs(lo->L - up->L) != 1) invalid(path, "not an electric-dipole transition (|dL| != 1)");
    if (!triangle(lo->J, up->J, HalfInt::from_int(1))) invalid(path, "|dJ| > 1");
  }

  for (const auto &[key, c] : s.hfs) {
    const std::string path = "hfs." + key;
    const FineLevel *l = s.find_level(key);
    if (!l) invalid(path, "dangling reference to level '" + key + "'");
    if (c.B != 0.0 && (l->J.twice() < 2 || s.I.twice() < 2))
      invalid(path + ".B", "quadrupole constant must vanish for J < 1 or I < 1");
  }
}

} // namespace

SpeciesData parse_species(const std::string &yaml_text, const std::string &source) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception &e) {
    throw Error(ErrorKind::parse, source, e.what());
  }
  if (!root.IsMap()) throw Error(ErrorKind::parse, source, "top level must be a mapping");

  SpeciesData s;
  const YAML::Node sp = require(root, "species", "");
  s.name = scalar(require(sp, "name", "species"), "species.name");
  if (sp["provenance"]) s.provenance = scalar(sp["provenance"], "species.provenance");
  s.I = half_int(sp, "nuclear_spin", "species");
  s.mass = quantity(sp, "mass", Dimension::mass, "species");
  s.ground_level = scalar(require(sp, "ground_level", "species"), "species.ground_level");
  s.saturation_intensity = quantity(sp, "saturation_intensity", Dimension::intensity, "species");
  s.gamma = quantity(sp, "dipole_decay_rate", Dimension::angular_frequency, "species");
  if (sp["surface_c3"]) s.surface_c3 = quantity(sp, "surface_c3", Dimension::c3, "species");

  const YAML::Node levels = require(root, "level", "");
  if (!levels.IsMap()) throw Error(ErrorKind::parse, "level", "expected a mapping of levels");
  for (const auto &kv : levels) {
    FineLevel l;
    l.key = kv.first.as<std::string>();
    const std::string path = "level." + l.key;
    l.n = integer(kv.second, "n", path);
    l.L = integer(kv.second, "L", path);
    l.J = half_int(kv.second, "J", path);
    l.energy = quantity(kv.second, "energy", Dimension::angular_frequency, path);
    s.levels.push_back(std::move(l));
  }

  if (const YAML::Node lines = root["line"]) {
    if (!lines.IsMap()) throw Error(ErrorKind::parse, "line", "expected a mapping of lines");
    for (const auto &kv : lines) {
      TransitionLine ln;
      ln.key = kv.first.as<std::string>();
      const std::string path = "line." + ln.key;
      ln.lower = scalar(require(kv.second, "lower", path), path + ".lower");
      ln.upper = scalar(require(kv.second, "upper", path), path + ".upper");
      ln.reduced_dipole = quantity(kv.second, "reduced_dipole", Dimension::dipole, path);
      s.lines.push_back(std::move(ln));
    }
  }

  if (const YAML::Node hfs = root["hfs"]) {
    if (!hfs.IsMap()) throw Error(ErrorKind::parse, "hfs", "expected a mapping of hyperfine constants");
    for (const auto &kv : hfs) {
      const std::string key = kv.first.as<std::string>();
      const std::string path = "hfs." + key;
      HfsConstants c;
      c.A = quantity(kv.second, "A", Dimension::cyclic_frequency, path);
      c.B = kv.second["B"] ? quantity(kv.second, "B", Dimension::cyclic_frequency, path) : 0.0;
      s.hfs.emplace(key, c);
    }
  }

  // line frequencies follow from the level energies
  for (auto &ln : s.lines) {
    const FineLevel *lo = s.find_level(ln.lower);
    const FineLevel *up = s.find_level(ln.upper);
    if (lo && up) ln.omega = up->energy - lo->energy;
  }
  validate(s);
  return s;
}

SpeciesData load_species(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, path.string(), "cannot open species file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_species(buf.str(), path.string());
}

std::string serialize_species(const SpeciesData &s) {
  using units::format_si;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "species" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << s.name;
  if (!s.provenance.empty()) out << YAML::Key << "provenance" << YAML::Value << s.provenance;
  out << YAML::Key << "nuclear_spin" << YAML::Value << s.I.str();
  out << YAML::Key << "mass" << YAML::Value << format_si(s.mass, Dimension::mass);
  out << YAML::Key << "ground_level" << YAML::Value << s.ground_level;
  out << YAML::Key << "saturation_intensity" << YAML::Value
      << format_si(s.saturation_intensity, Dimension::intensity);
  out << YAML::Key << "dipole_decay_rate" << YAML::Value << format_si(s.gamma, Dimension::angular_frequency);
  if (s.surface_c3 != 0.0)
    out << YAML::Key << "surface_c3" << YAML::Value << format_si(s.surface_c3, Dimension::c3);
  out << YAML::EndMap;

  out << YAML::Key << "level" << YAML::Value << YAML::BeginMap;
  for (const auto &l : s.levels) {
    out << YAML::Key << l.key << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "n" << YAML::Value << l.n;
    out << YAML::Key << "L" << YAML::Value << l.L;
    out << YAML::Key << "J" << YAML::Value << l.J.str();
    out << YAML::Key << "energy" << YAML::Value << format_si(l.energy, Dimension::angular_frequency);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "line" << YAML::Value << YAML::BeginMap;
  for (const auto &ln : s.lines) {
    out << YAML::Key << ln.key << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "lower" << YAML::Value << ln.lower;
    out << YAML::Key << "upper" << YAML::Value << ln.upper;
    out << YAML::Key << "reduced_dipole" << YAML::Value << format_si(ln.reduced_dipole, Dimension::dipole);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "hfs" << YAML::Value << YAML::BeginMap;
  for (const auto &[key, c] : s.hfs) {
    out << YAML::Key << key << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "A" << YAML::Value << format_si(c.A, Dimension::cyclic_frequency);
    out << YAML::Key << "B" << YAML::Value << format_si(c.B, Dimension::cyclic_frequency);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::vector<LineCoupling> lines_coupling_to(const SpeciesData &species, const std::string &level_key) {
  const FineLevel &self = species.level(level_key);
  std::vector<LineCoupling> out;
  for (const auto &ln : species.lines) {
    if (ln.lower != level_key && ln.upper != level_key) continue;
    const bool self_is_lower = ln.lower == level_key;
    const FineLevel &partner = species.level(self_is_lower ? ln.upper : ln.lower);
    out.push_back({&ln, partner.key, partner.J, partner.energy - self.energy});
  }
  return out;
}

} // namespace wgm::atomdata
