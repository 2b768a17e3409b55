#include "eegglt/error.hpp"

namespace eegglt {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroVarianceChannel: return "ZeroVarianceChannel";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OffSphereCoordinate: return "OffSphereCoordinate";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::IsolatedNode: return "IsolatedNode";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::InvalidRate: return "InvalidRate";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::MissingSnapshot: return "MissingSnapshot";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::InconsistentHeader: return "InconsistentHeader";
    case ErrorCode::UnknownRun: return "UnknownRun";
    case ErrorCode::MissingAnnotation: return "MissingAnnotation";
    case ErrorCode::InvalidFrequency: return "InvalidFrequency";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::InvalidDensity: return "InvalidDensity";
    case ErrorCode::Io: return "Io";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

ErrorKind kind_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidOrder:
    case ErrorCode::InvalidRate:
    case ErrorCode::InvalidFrequency:
    case ErrorCode::InvalidDensity:
    case ErrorCode::UnknownRun:
      return ErrorKind::Argument;
    case ErrorCode::NonFiniteValue:
    case ErrorCode::NonFiniteLoss:
    case ErrorCode::AsymmetricInput:
      return ErrorKind::Numeric;
    default:
      return ErrorKind::Data;
  }
}

}  // namespace eegglt
