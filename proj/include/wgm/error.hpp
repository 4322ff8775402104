#pragma once

#include <stdexcept>
#include <string>

namespace wgm {

enum class ErrorKind {
  parse,      // malformed input text
  validation, // well-formed input violating an invariant
  config,     // experiment configuration problem
  resonance,  // light frequency too close to an atomic line
  cutoff,     // Fock-space truncation too small
  singular,   // degenerate linear system (e.g. Liouvillian without dissipation)
  domain,     // argument outside the modeled domain
  io,         // file system failure
};

/// Base exception of the library. `path` names the offending field when known
/// (e.g. "level.5P3/2.J" or "trap.power").
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string path, const std::string &message)
      : std::runtime_error(path.empty() ? message : path + ": " + message),
        kind_(kind), path_(std::move(path)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string &path() const noexcept { return path_; }

private:
  ErrorKind kind_;
  std::string path_;
};

const char *to_string(ErrorKind kind) noexcept;

} // namespace wgm
