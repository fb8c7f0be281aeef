#include "afem/error.hpp"

namespace afem {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kNonConforming: return "NonConforming";
    case ErrorCode::kDegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::kIncompatibleLabels: return "IncompatibleLabels";
    case ErrorCode::kCompletionOverflow: return "CompletionOverflow";
    case ErrorCode::kNotARefinement: return "NotARefinement";
    case ErrorCode::kQuadratureDomainError: return "QuadratureDomainError";
    case ErrorCode::kInvalidExponent: return "InvalidExponent";
    case ErrorCode::kNonellipticDiffusion: return "NonellipticDiffusion";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kSingularJacobian: return "SingularJacobian";
    case ErrorCode::kDampingStall: return "DampingStall";
    case ErrorCode::kBreakdown: return "Breakdown";
    case ErrorCode::kMaxIters: return "MaxIters";
    case ErrorCode::kMeshTooLarge: return "MeshTooLarge";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace afem
