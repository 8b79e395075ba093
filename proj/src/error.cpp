#include "wirebend/error.hpp"

namespace wirebend {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyCurve: return "EmptyCurve";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::NonOrthogonalNormal: return "NonOrthogonalNormal";
    case ErrorCode::DegenerateAngle: return "DegenerateAngle";
    case ErrorCode::TangentOverlap: return "TangentOverlap";
    case ErrorCode::InconsistentAngles: return "InconsistentAngles";
    case ErrorCode::UnreachablePose: return "UnreachablePose";
    case ErrorCode::TargetExceedsWorkRange: return "TargetExceedsWorkRange";
    case ErrorCode::DiameterTooLarge: return "DiameterTooLarge";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::PlanningTimeout: return "PlanningTimeout";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DivergenceFound: return "DivergenceFound";
  }
  return "Unknown";
}

}  // namespace wirebend
