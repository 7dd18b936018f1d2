#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace broadcd {

enum class ErrorCode {
  DecodeError,
  EncodeError,
  IoError,
  DimensionMismatch,
  LengthMismatch,
  InvalidArgument,
  InsufficientClassSamples,
  TargetExceedsAvailable,
  EmptyClass,
  SingletonClass,
  InsufficientMajority,
  SingularSystem,
  NonFiniteInput,
  FormatError,
  VersionMismatch,
  GeometryError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace broadcd
