#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace foodanno {

// Every failure the library reports. The string form returned by
// error_code_name() is a stable machine identifier shared with the HTTP API.
enum class Errc {
  // segmentation backend
  MissingModel,
  CorruptModel,
  OversizeImage,
  RuntimeFailure,
  UnsupportedExcludePoint,
  EmptyPrompt,
  // images
  InvalidImage,
  // session
  OutOfBounds,
  NothingToUndo,
  NoPendingMask,
  EmptyMask,
  InvalidBrush,
  UnknownCategory,
  InvalidQuantity,
  UnknownItem,
  DuplicateCategory,
  EmptyName,
  // persistence
  MissingFile,
  LengthMismatch,
  MalformedRuns,
  IoFailure,
  SchemaVersionUnsupported,
  DigestMismatch,
  MalformedDocument,
  MissingMaskForImage,
  UnreadableRaster,
  // evaluation
  EmptyGroundTruth,
  DimensionMismatch,
  InvalidConfig,
};

std::string_view error_code_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace foodanno
