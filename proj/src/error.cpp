#include "radsynth/error.hpp"

namespace radsynth {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::NonPositiveDim: return "NonPositiveDim";
    case ErrorCode::NonFiniteVoxel: return "NonFiniteVoxel";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NoPlacementFound: return "NoPlacementFound";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::AllDirectionsEmpty: return "AllDirectionsEmpty";
    case ErrorCode::WrongLength: return "WrongLength";
    case ErrorCode::ZeroStd: return "ZeroStd";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BadStepPair: return "BadStepPair";
    case ErrorCode::DivisionAtEndpoint: return "DivisionAtEndpoint";
    case ErrorCode::TargetUnreachable: return "TargetUnreachable";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::PortInUse: return "PortInUse";
    case ErrorCode::Cancelled: return "Cancelled";
  }
  return "Unknown";
}

}  // namespace radsynth
