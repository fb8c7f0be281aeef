#pragma once

#include <stdexcept>
#include <string>

namespace afem {

enum class ErrorCode {
  kNonConforming,
  kDegenerateTriangle,
  kIncompatibleLabels,
  kCompletionOverflow,
  kNotARefinement,
  kQuadratureDomainError,
  kInvalidExponent,
  kNonellipticDiffusion,
  kNoConvergence,
  kSingularJacobian,
  kDampingStall,
  kBreakdown,
  kMaxIters,
  kMeshTooLarge,
  kInvalidArgument,
  kParseError,
  kIoError,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace afem
