#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace radsynth {

enum class ErrorCode {
  BadMagic,
  TruncatedPayload,
  NonPositiveDim,
  NonFiniteVoxel,
  IoFailure,
  DimMismatch,
  NoPlacementFound,
  IndexOutOfRange,
  EmptyMask,
  BadParams,
  AllDirectionsEmpty,
  WrongLength,
  ZeroStd,
  ShapeMismatch,
  BadStepPair,
  DivisionAtEndpoint,
  TargetUnreachable,
  GridTooSmall,
  ConstantInput,
  LengthMismatch,
  TooSmall,
  NotFound,
  UnknownKey,
  PortInUse,
  Cancelled,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library is reported through this type; `code()` is
/// the machine-readable part surfaced by the CLI and HTTP layers.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace radsynth
