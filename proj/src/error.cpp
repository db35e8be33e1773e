#include "mqe/error.hpp"

namespace mqe {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::support_too_small: return "support_too_small";
    case ErrorKind::duplicate_centers: return "duplicate_centers";
    case ErrorKind::singular: return "singular";
    case ErrorKind::solver: return "solver";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace mqe
