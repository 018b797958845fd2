#include "optcons/errors.hpp"

namespace optcons {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::DegenerateInterval: return "DegenerateInterval";
    case ErrorCode::NotOutputControllable: return "NotOutputControllable";
    case ErrorCode::KernelNotInvariant: return "KernelNotInvariant";
    case ErrorCode::SingularInnerMatrix: return "SingularInnerMatrix";
    case ErrorCode::NearSingularHorizon: return "NearSingularHorizon";
    case ErrorCode::InitialStateNotInKernel: return "InitialStateNotInKernel";
    case ErrorCode::ImaginaryAxisEigenvalue: return "ImaginaryAxisEigenvalue";
    case ErrorCode::NotStabilizable: return "NotStabilizable";
    case ErrorCode::NotDetectable: return "NotDetectable";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::RankDeficientConstraints: return "RankDeficientConstraints";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace optcons
