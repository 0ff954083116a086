#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace simi {

enum class Errc {
  FileNotFound,
  UnsupportedFormat,
  CorruptData,
  ShapeMismatch,
  ChannelCountMismatch,
  NonBinaryValue,
  InvalidLevelCount,
  NonPositiveStride,
  DivisionRangeViolation,
  NonScalarLoss,
  MissingGradient,
  EmptyTrace,
  EmptyDataset,
  DivergedLoss,
  ConfigDigestMismatch,
  CorruptCheckpoint,
  DimensionMismatch,
  ImageTooSmall,
  InvalidConfig,
  IoError,
};

std::string_view errc_name(Errc code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace simi
