#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fiberlab {

/// Stable error codes. The string form (code_name) is part of the CLI contract.
enum class ErrorCode {
  GridMismatch,
  OrientationViolation,
  AmplitudeExceeded,
  UndersampledPath,
  UnsupportedBase,
  InvalidEuler,
  NotTangent,
  BeyondInjectivityRadius,
  NonconvergedODE,
  BaseMismatch,
  OutsideConvexBall,
  Nonconvergence,
  TubeRadiusExceeded,
  NonInjectiveProjection,
  BaseCollision,
  DivergingResiduals,
  NonPrimitive,
  DisjointnessLost,
  DegenerateSpacing,
  CFLViolation,
  SelfIntersection,
  TimeBudgetExceeded,
  UnknownSubcommand,
  BadConfig,
  InvalidInput,
};

std::string_view code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fiberlab
