#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wgm::cli {

std::string sha256_hex(const std::string &bytes);

/// Collects written files and emits manifest.json next to them.
class OutputSet {
public:
  explicit OutputSet(std::filesystem::path dir);

  const std::filesystem::path &dir() const { return dir_; }
  /// Writes `content` to dir/name and records its checksum. Error(io) on failure.
  void write(const std::string &name, const std::string &content);
  void finish(const std::string &command, const std::string &config_text, const std::vector<std::uint64_t> &seeds,
              double wall_seconds) const;

private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

} // namespace wgm::cli
