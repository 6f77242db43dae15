#pragma once

#include <stdexcept>
#include <string>

namespace branchsim {

// Error taxonomy shared across the library. The CLI maps categories to
// process exit codes, so new codes must be added to both places.
enum class ErrorCode {
  MalformedDescription,
  DanglingFace,
  WeightBelowBound,
  UnknownSimplex,
  BadConfiguration,
  DimensionMismatch,
  PathExplosion,
  BudgetExceeded,
  ZeroMicrostates,
  DegenerateEnsemble,
  DegenerateProbability,
  BadModelKind,
  InvalidSpec,
  BadInitialState,
  NonOrthogonalDecomposition,
  UnnormalizedState,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedDescription: return "MalformedDescription";
    case ErrorCode::DanglingFace: return "DanglingFace";
    case ErrorCode::WeightBelowBound: return "WeightBelowBound";
    case ErrorCode::UnknownSimplex: return "UnknownSimplex";
    case ErrorCode::BadConfiguration: return "BadConfiguration";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::PathExplosion: return "PathExplosion";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ZeroMicrostates: return "ZeroMicrostates";
    case ErrorCode::DegenerateEnsemble: return "DegenerateEnsemble";
    case ErrorCode::DegenerateProbability: return "DegenerateProbability";
    case ErrorCode::BadModelKind: return "BadModelKind";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::BadInitialState: return "BadInitialState";
    case ErrorCode::NonOrthogonalDecomposition: return "NonOrthogonalDecomposition";
    case ErrorCode::UnnormalizedState: return "UnnormalizedState";
  }
  return "UnknownError";
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace branchsim
