#include "manifest.hpp"

#include "wgm/error.hpp"

#include "json.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>

#ifndef WGM_VERSION
#define WGM_VERSION "unknown"
#endif

namespace wgm::cli {

std::string sha256_hex(const std::string &bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::io, "", "SHA-256 failed");
  std::string hex;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorKind::io, dir_.string(), "cannot create output directory: " + ec.message());
}

void OutputSet::write(const std::string &name, const std::string &content) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error(ErrorKind::io, path.string(), "write failed");
  files_.emplace_back(name, sha256_hex(content));
}

void OutputSet::finish(const std::string &command, const std::string &config_text,
                       const std::vector<std::uint64_t> &seeds, double wall_seconds) const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["code_version"] = WGM_VERSION;
  j["config_sha256"] = sha256_hex(config_text);
  j["seeds"] = seeds;
  j["wall_seconds"] = wall_seconds;
  auto &outs = j["outputs"] = nlohmann::ordered_json::array();
  for (const auto &[name, hash] : files_) outs.push_back({{"file", name}, {"sha256", hash}});
  const auto path = dir_ / "manifest.json";
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::io, path.string(), "write failed");
}

} // namespace wgm::cli
