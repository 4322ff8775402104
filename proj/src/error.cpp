#include "wgm/error.hpp"

namespace wgm {

const char *to_string(ErrorKind kind) noexcept {
  switch (kind) {
  case ErrorKind::parse: return "parse error";
  case ErrorKind::validation: return "validation error";
  case ErrorKind::config: return "configuration error";
  case ErrorKind::resonance: return "resonance error";
  case ErrorKind::cutoff: return "cutoff error";
  case ErrorKind::singular: return "singular system";
  case ErrorKind::domain: return "domain error";
  case ErrorKind::io: return "I/O error";
  }
  return "error";
}

} // namespace wgm
