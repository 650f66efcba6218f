#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ltl {

enum class ErrorKind {
  kInvalidSequence,
  kSizeLimit,
  kEmptyTree,
  kSyntaxError,
  kLengthMismatch,
  kIdMismatch,
  kNeedTwoRuns,
  kUnknownLabel,
  kShapeMismatch,
  kNonScalarLoss,
  kGraphConsumed,
  kNaNGuard,
  kDimDrift,
  kDuplicateToken,
  kOddDim,
  kTransitionsRequired,
  kVariantMismatch,
  kInvalidConfig,
  kIo,
  kData,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidSequence: return "InvalidSequence";
    case ErrorKind::kSizeLimit: return "SizeLimit";
    case ErrorKind::kEmptyTree: return "EmptyTree";
    case ErrorKind::kSyntaxError: return "SyntaxError";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kIdMismatch: return "IdMismatch";
    case ErrorKind::kNeedTwoRuns: return "NeedTwoRuns";
    case ErrorKind::kUnknownLabel: return "UnknownLabel";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kNonScalarLoss: return "NonScalarLoss";
    case ErrorKind::kGraphConsumed: return "GraphConsumed";
    case ErrorKind::kNaNGuard: return "NaNGuard";
    case ErrorKind::kDimDrift: return "DimDrift";
    case ErrorKind::kDuplicateToken: return "DuplicateToken";
    case ErrorKind::kOddDim: return "OddDim";
    case ErrorKind::kTransitionsRequired: return "TransitionsRequired";
    case ErrorKind::kVariantMismatch: return "VariantMismatch";
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kData: return "DataError";
  }
  return "Unknown";
}

// Every failure raised by the library carries a kind so that callers (the CLI
// in particular) can map it onto an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Process exit status for a failure of the given kind.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNaNGuard:
    case ErrorKind::kNonScalarLoss:
      return 4;
    case ErrorKind::kInvalidConfig:
      return 2;
    default:
      return 3;
  }
}

}  // namespace ltl
