#include "doctest.h"

#include "config.hpp"
#include "manifest.hpp"
#include "svg.hpp"

#include "wgm/error.hpp"

#include <fstream>
#include <sstream>

using namespace wgm;
using namespace wgm::cli;

namespace {

const std::filesystem::path default_config = WGM_SOURCE_DIR "/configs/default.yaml";

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string replace(std::string s, const std::string &from, const std::string &to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

bool has_path(const std::vector<Violation> &v, const std::string &path) {
  for (const auto &x : v)
    if (x.path == path) return true;
  return false;
}

} // namespace

TEST_CASE("default config validates") {
  ExperimentConfig c;
  const auto v = load_config(default_config, c);
  for (const auto &x : v) MESSAGE(x.path << ": " << x.message);
  CHECK(v.empty());
  CHECK(c.trap.power == doctest::Approx(18.7e-3));
  CHECK(c.trap.waist == doctest::Approx(3.5e-6));
  CHECK(c.compensation_detuning == doctest::Approx(-2 * 3.141592653589793 * 927e6));
  CHECK(c.scan_powers.size() == 161);
  CHECK(c.scan_powers.back() == doctest::Approx(800e-6));
  CHECK(c.fluorescence_beams.pol.custom.has_value());
}

TEST_CASE("violations are reported with their paths") {
  const auto text = slurp(default_config);
  ExperimentConfig c;
  auto v = parse_config(replace(text, "power: 18.7 mW", "power: -18.7 mW"), default_config, c);
  CHECK(has_path(v, "beams.trap.power"));

  v = parse_config(replace(text, "species: ../data/rb85.yaml", "species: ../data/missing.yaml"), default_config, c);
  REQUIRE(v.size() == 1);
  CHECK(v[0].path == "species");

  v = parse_config(replace(text, "waist: 3.5 um", "waist: 3.5 kg"), default_config, c);
  CHECK(has_path(v, "beams.trap.waist"));

  // several independent problems are all collected
  auto bad = replace(text, "power: 18.7 mW", "power: -1 mW");
  bad = replace(bad, "kappa0: 5 MHz", "kappa0: -5 MHz");
  v = parse_config(bad, default_config, c);
  CHECK(v.size() >= 2);
  CHECK(has_path(v, "resonator.kappa0"));

  v = parse_config(replace(text, "{start: 0 uW, stop: 800 uW, step: 5 uW}", "[]"), default_config, c);
  CHECK(has_path(v, "compensation_scan.powers"));

  v = parse_config("beams: [1, 2", default_config, c);
  CHECK_FALSE(v.empty());
}

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("output set writes files and a manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "wgm_cli_test";
  std::filesystem::remove_all(dir);
  OutputSet out(dir);
  out.write("a.csv", "x,y\n1,2\n");
  out.finish("shifts", "config", {7}, 0.5);
  CHECK(slurp(dir / "a.csv") == "x,y\n1,2\n");
  const auto m = slurp(dir / "manifest.json");
  CHECK(m.find(sha256_hex("x,y\n1,2\n")) != std::string::npos);
  CHECK(m.find(sha256_hex("config")) != std::string::npos);
  CHECK(m.find("\"shifts\"") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("svg output is deterministic") {
  Plot p{"t", "x", "y", {{"s", {0, 1, 2}, {1, 3, 2}, false}, {"d", {0, 2}, {0, 1}, true}}};
  const auto a = render_svg(p);
  CHECK(a == render_svg(p));
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(a.find("</svg>") != std::string::npos);
}
