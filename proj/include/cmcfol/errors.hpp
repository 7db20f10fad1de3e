#pragma once

#include <stdexcept>
#include <string>

namespace cmcfol {

enum class ErrorCode {
  DegenerateLattice,
  AngleOutOfRange,
  MarkedPointsCollide,
  TruncationTooLow,
  NonPositiveFaceArea,
  QuadratureFailure,
  ChartDomain,
  PositiveChi,
  InadmissibleH,
  NonConvergence,
  LinearSolveFailure,
  Overflow,
  FlowSingular,
  DomainError,
  CurvatureNotConstant,
  BoundViolation,
  BoundsViolated,
  OrderingViolated,
  NotConstantCurvature,
  EmptyInterval,
  DegenerateComposite,
  ZeroHopf,
  SingularB,
  ParseError,
  ValidationError,
  IoError,
};

const char* error_code_name(ErrorCode c);

/// All library failures throw this; `code` identifies the contract that was violated.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

} // namespace cmcfol
