#include "broadcd/error.hpp"

namespace broadcd {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::EncodeError: return "EncodeError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InsufficientClassSamples: return "InsufficientClassSamples";
    case ErrorCode::TargetExceedsAvailable: return "TargetExceedsAvailable";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::SingletonClass: return "SingletonClass";
    case ErrorCode::InsufficientMajority: return "InsufficientMajority";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::GeometryError: return "GeometryError";
  }
  return "UnknownError";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace broadcd
