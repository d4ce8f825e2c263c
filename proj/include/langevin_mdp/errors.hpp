#pragma once

#include <stdexcept>
#include <string>

namespace lmdp {

enum class ErrorKind {
  InvalidArgument,
  NonPositiveDamping,
  NonFinite,
  GridMismatch,
  SingularDiffusion,
  NonzeroStart,
  SingularGramian,
  StiffnessViolation,
  InsufficientData,
  NotSupported,
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// True for errors caused by malformed input rather than numerical failure.
bool is_input_error(ErrorKind kind) noexcept;

}  // namespace lmdp
