#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "foodanno/backend.hpp"
#include "foodanno/category.hpp"
#include "foodanno/image.hpp"
#include "foodanno/rle.hpp"
#include "foodanno/session.hpp"

namespace foodanno {

inline constexpr int kProjectSchemaVersion = 1;
inline constexpr char kProjectDocument[] = "project.json";
inline constexpr char kProjectImage[] = "image.png";
inline constexpr char kProjectOverlay[] = "overlay.png";

// Plain text, one category name per line; blank lines are skipped and ids
// follow line order from 0. Throws MissingFile or DuplicateCategory.
CategoryRegistry load_category_file(const std::filesystem::path& path);
CategoryRegistry parse_category_text(std::string_view text);

struct ProjectItem {
  int item_id = 0;
  int category_id = 0;
  std::optional<Quantity> quantity;
  RleMask mask;

  friend bool operator==(const ProjectItem&, const ProjectItem&) = default;
};

struct ProjectFile {
  int schema_version = kProjectSchemaVersion;
  std::string image_filename;
  std::string image_digest;
  BackendKind backend = BackendKind::MealSam;
  std::vector<Category> categories;
  std::vector<ProjectItem> items;
  int next_item_id = 0;
  double total_annotation_seconds = 0.0;

  friend bool operator==(const ProjectFile&, const ProjectFile&) = default;
};

ProjectFile make_project_file(const Session& session);

// UTF-8 JSON with sorted keys; identical documents serialize to identical bytes.
std::string serialize_project(const ProjectFile& project);
// Throws MalformedDocument, SchemaVersionUnsupported, UnknownCategory, LengthMismatch, ...
ProjectFile parse_project(std::string_view text);

struct SavedPaths {
  std::filesystem::path project;
  std::filesystem::path image;
  std::filesystem::path overlay;
};

// Writes project.json, image.png and overlay.png into `dir` (created if
// needed). Each file is written to a temporary name and renamed into place.
SavedPaths save_project(const Session& session, const std::filesystem::path& dir);

struct LoadedProject {
  ProjectFile document;
  RgbImage image;
};

// Throws IoFailure, SchemaVersionUnsupported, DigestMismatch.
LoadedProject load_project(const std::filesystem::path& dir);

Session restore_session(LoadedProject project, std::shared_ptr<Backend> backend);

// Model files per backend kind, read from a JSON manifest such as
//   {"mealsam": {"encoder": "enc.onnx", "decoder": "mealsam_dec.onnx"}, ...}
// Relative paths resolve against the manifest's directory.
ModelManifest load_model_manifest(const std::filesystem::path& path);

}  // namespace foodanno
