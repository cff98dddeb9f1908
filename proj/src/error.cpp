#include "foodanno/error.hpp"

namespace foodanno {

std::string_view error_code_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingModel: return "missing_model";
    case Errc::CorruptModel: return "corrupt_model";
    case Errc::OversizeImage: return "oversize_image";
    case Errc::RuntimeFailure: return "runtime_failure";
    case Errc::UnsupportedExcludePoint: return "unsupported_exclude_point";
    case Errc::EmptyPrompt: return "empty_prompt";
    case Errc::InvalidImage: return "invalid_image";
    case Errc::OutOfBounds: return "out_of_bounds";
    case Errc::NothingToUndo: return "nothing_to_undo";
    case Errc::NoPendingMask: return "no_pending_mask";
    case Errc::EmptyMask: return "empty_mask";
    case Errc::InvalidBrush: return "invalid_brush";
    case Errc::UnknownCategory: return "unknown_category";
    case Errc::InvalidQuantity: return "invalid_quantity";
    case Errc::UnknownItem: return "unknown_item";
    case Errc::DuplicateCategory: return "duplicate_category";
    case Errc::EmptyName: return "empty_name";
    case Errc::MissingFile: return "missing_file";
    case Errc::LengthMismatch: return "length_mismatch";
    case Errc::MalformedRuns: return "malformed_runs";
    case Errc::IoFailure: return "io_failure";
    case Errc::SchemaVersionUnsupported: return "schema_version_unsupported";
    case Errc::DigestMismatch: return "digest_mismatch";
    case Errc::MalformedDocument: return "malformed_document";
    case Errc::MissingMaskForImage: return "missing_mask_for_image";
    case Errc::UnreadableRaster: return "unreadable_raster";
    case Errc::EmptyGroundTruth: return "empty_ground_truth";
    case Errc::DimensionMismatch: return "dimension_mismatch";
    case Errc::InvalidConfig: return "invalid_config";
  }
  return "internal";
}

}  // namespace foodanno
