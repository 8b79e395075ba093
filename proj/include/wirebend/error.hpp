#pragma once

#include <stdexcept>
#include <string>

namespace wirebend {

enum class ErrorCode {
  EmptyCurve,
  NonFinite,
  TooFewPoints,
  DegenerateSegment,
  NonOrthogonalNormal,
  DegenerateAngle,
  TangentOverlap,
  InconsistentAngles,
  UnreachablePose,
  TargetExceedsWorkRange,
  DiameterTooLarge,
  NoSolution,
  PlanningTimeout,
  InvalidArgument,
  ParseError,
  IoError,
  DivergenceFound,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wirebend
