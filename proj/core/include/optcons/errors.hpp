#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace optcons {

enum class ErrorCode {
  InvalidArgument,
  NonSquare,
  DimensionMismatch,
  NonFinite,
  ToleranceNotMet,
  DegenerateInterval,
  NotOutputControllable,
  KernelNotInvariant,
  SingularInnerMatrix,
  NearSingularHorizon,
  InitialStateNotInKernel,
  ImaginaryAxisEigenvalue,
  NotStabilizable,
  NotDetectable,
  NonFiniteState,
  DisconnectedGraph,
  RankDeficientConstraints,
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and the CLI) can branch on the kind of failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace optcons
