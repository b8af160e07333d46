#ifndef CORROSCALE_ERRORS_HPP
#define CORROSCALE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace corroscale {

enum class ErrorCode {
  // configuration / validation problems (CLI exit code 2)
  RadiusOrdering,
  UnsupportedDim,
  MissingInterface,
  MissingCorrector,
  NegativeRate,
  NegativeInitialData,
  ResolutionTooCoarse,
  MismatchedConfigs,
  ParseError,
  UnknownKey,
  MissingSection,
  InvalidConfig,
  // solver / runtime problems (CLI exit code 3)
  MeshFailure,
  SingularSystem,
  NoConvergence,
  SolverDiverged,
  StepRejected,
  IoError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::RadiusOrdering: return "RadiusOrdering";
    case ErrorCode::UnsupportedDim: return "UnsupportedDim";
    case ErrorCode::MissingInterface: return "MissingInterface";
    case ErrorCode::MissingCorrector: return "MissingCorrector";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::NegativeInitialData: return "NegativeInitialData";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::MismatchedConfigs: return "MismatchedConfigs";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::MissingSection: return "MissingSection";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MeshFailure: return "MeshFailure";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::StepRejected: return "StepRejected";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

/// Process exit code the CLI maps an error to: 2 for configuration and
/// validation failures, 3 for solver and runtime failures.
inline int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::MeshFailure:
    case ErrorCode::SingularSystem:
    case ErrorCode::NoConvergence:
    case ErrorCode::SolverDiverged:
    case ErrorCode::StepRejected:
    case ErrorCode::IoError:
      return 3;
    default:
      return 2;
  }
}

}  // namespace corroscale

#endif
