#include "fiberlab/error.hpp"

namespace fiberlab {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::OrientationViolation: return "OrientationViolation";
    case ErrorCode::AmplitudeExceeded: return "AmplitudeExceeded";
    case ErrorCode::UndersampledPath: return "UndersampledPath";
    case ErrorCode::UnsupportedBase: return "UnsupportedBase";
    case ErrorCode::InvalidEuler: return "InvalidEuler";
    case ErrorCode::NotTangent: return "NotTangent";
    case ErrorCode::BeyondInjectivityRadius: return "BeyondInjectivityRadius";
    case ErrorCode::NonconvergedODE: return "NonconvergedODE";
    case ErrorCode::BaseMismatch: return "BaseMismatch";
    case ErrorCode::OutsideConvexBall: return "OutsideConvexBall";
    case ErrorCode::Nonconvergence: return "Nonconvergence";
    case ErrorCode::TubeRadiusExceeded: return "TubeRadiusExceeded";
    case ErrorCode::NonInjectiveProjection: return "NonInjectiveProjection";
    case ErrorCode::BaseCollision: return "BaseCollision";
    case ErrorCode::DivergingResiduals: return "DivergingResiduals";
    case ErrorCode::NonPrimitive: return "NonPrimitive";
    case ErrorCode::DisjointnessLost: return "DisjointnessLost";
    case ErrorCode::DegenerateSpacing: return "DegenerateSpacing";
    case ErrorCode::CFLViolation: return "CFLViolation";
    case ErrorCode::SelfIntersection: return "SelfIntersection";
    case ErrorCode::TimeBudgetExceeded: return "TimeBudgetExceeded";
    case ErrorCode::UnknownSubcommand: return "UnknownSubcommand";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

}  // namespace fiberlab
