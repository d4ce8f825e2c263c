#include "langevin_mdp/errors.hpp"

namespace lmdp {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonPositiveDamping: return "NonPositiveDamping";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::SingularDiffusion: return "SingularDiffusion";
    case ErrorKind::NonzeroStart: return "NonzeroStart";
    case ErrorKind::SingularGramian: return "SingularGramian";
    case ErrorKind::StiffnessViolation: return "StiffnessViolation";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::NotSupported: return "NotSupported";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

bool is_input_error(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::GridMismatch:
    case ErrorKind::NonzeroStart:
    case ErrorKind::NotSupported:
      return true;
    default:
      return false;
  }
}

}  // namespace lmdp
