#include "mast/error.hpp"

namespace mast {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::DegenerateLogits: return "DegenerateLogits";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::InfeasibleMasks: return "InfeasibleMasks";
    case ErrorKind::SingularFit: return "SingularFit";
    case ErrorKind::EmptyBand: return "EmptyBand";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(to_string(kind)) + ": " + what);
}

}  // namespace mast
