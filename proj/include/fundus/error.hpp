#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fundus {

enum class ErrorCode {
  // raster / io
  UnsupportedFormat,
  CorruptFile,
  IoError,
  Precondition,
  BadMagic,
  ShapeMismatch,
  NonFiniteValue,
  OutOfRange,
  // locator
  EvenKernel,
  EmptyMask,
  NoRetinaFound,
  // standardizer / augment
  BboxOutOfBounds,
  ImageSmallerThanGrid,
  NonSquareInput,
  // metrics
  DegenerateSingleClass,
  MissingPrediction,
  // datasets
  LayoutMismatch,
  UnknownKind,
  KTooLarge,
  // config
  InvalidConfig,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a code so callers can
/// branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace fundus
