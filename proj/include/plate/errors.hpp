#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plate {

enum class ErrorCode {
  NoSignChange,
  NonFinite,
  NoConvergence,
  BranchMismatch,
  NotAdmissible,
  RootIsolationFailure,
  C0Violated,
  DegenerateField,
  QuadratureFailure,
  SingularMass,
  MaxItersExceeded,
  InvalidConfig,
  InvalidWeight,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BranchMismatch: return "BranchMismatch";
    case ErrorCode::NotAdmissible: return "NotAdmissible";
    case ErrorCode::RootIsolationFailure: return "RootIsolationFailure";
    case ErrorCode::C0Violated: return "C0Violated";
    case ErrorCode::DegenerateField: return "DegenerateField";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::SingularMass: return "SingularMass";
    case ErrorCode::MaxItersExceeded: return "MaxItersExceeded";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map them onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace plate
