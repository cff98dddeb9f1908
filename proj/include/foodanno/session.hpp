#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "foodanno/backend.hpp"
#include "foodanno/category.hpp"
#include "foodanno/image.hpp"
#include "foodanno/mask.hpp"
#include "foodanno/rle.hpp"

namespace foodanno {

enum class QuantityUnit { Gram, Milliliter };

std::string_view quantity_unit_name(QuantityUnit unit) noexcept;  // "g" | "ml"
std::optional<QuantityUnit> parse_quantity_unit(std::string_view name) noexcept;

struct Quantity {
  double value = 0.0;  // finite, >= 0
  QuantityUnit unit = QuantityUnit::Gram;

  friend bool operator==(const Quantity&, const Quantity&) = default;
};

struct AnnotationItem {
  int item_id = 0;
  MaskBitmap mask;
  int category_id = 0;
  std::optional<Quantity> quantity;

  friend bool operator==(const AnnotationItem&, const AnnotationItem&) = default;
};

enum class BrushMode { Add, Erase };

struct PixelCoord {
  int x = 0;
  int y = 0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

// Pixels on the integer line from a to b, both ends included.
std::vector<PixelCoord> rasterize_line(PixelCoord a, PixelCoord b);

// Sets (Add) or clears (Erase) every pixel within Euclidean distance `radius`
// of any pixel on the rasterized polyline. Pixels outside the mask are ignored.
void stamp_brush(MaskBitmap& mask, std::span<const PixelCoord> path, int radius, BrushMode mode);

// Blend used by overlays: round-half-up average of image and color.
constexpr std::uint8_t blend_half(std::uint8_t image, std::uint8_t color) noexcept {
  return static_cast<std::uint8_t>((image + color + 1) / 2);
}

inline constexpr Rgb kPendingHighlight{255, 255, 255};

// Live annotation state for one image. Pending state (points, mask, undo
// records) belongs to the item in progress; committed items only change by
// deletion. Every mutator either succeeds or throws with the state untouched.
// A Session is not internally synchronized.
class Session {
 public:
  Session(RgbImage image, std::string source_filename, std::shared_ptr<Backend> backend,
          CategoryRegistry registry);

  // Rebuilds a saved session with empty pending state.
  static Session restore(RgbImage image, std::string source_filename,
                         std::shared_ptr<Backend> backend, CategoryRegistry registry,
                         std::vector<AnnotationItem> items, int next_item_id,
                         double prior_annotation_seconds);

  const std::string& id() const noexcept { return id_; }
  const RgbImage& image() const noexcept { return image_; }
  const std::string& image_digest() const noexcept { return image_digest_; }
  const std::string& source_filename() const noexcept { return source_filename_; }
  const Backend& backend() const noexcept { return *backend_; }
  BackendKind backend_kind() const noexcept { return backend_->kind(); }
  const CategoryRegistry& registry() const noexcept { return registry_; }
  const std::vector<PromptPoint>& pending_points() const noexcept { return points_; }
  const std::optional<MaskBitmap>& pending_mask() const noexcept { return mask_; }
  const std::vector<AnnotationItem>& items() const noexcept { return items_; }
  std::size_t undo_depth() const noexcept { return undo_.size(); }
  int next_item_id() const noexcept { return next_item_id_; }

  // Seconds since the session was created, including time carried over from
  // a restored project.
  double annotation_seconds() const;

  void add_point(PromptPoint p);
  void undo_last();
  void clear_points();
  MaskPrediction semi_segment();
  void brush_stroke(std::span<const PixelCoord> path, int radius, BrushMode mode);

  int add_category(std::string_view name);

  const AnnotationItem& validate_item(int category_id, std::optional<Quantity> quantity);
  // Creates the category and commits the item as one step.
  const AnnotationItem& validate_item_with_new_category(std::string_view name,
                                                        std::optional<Quantity> quantity);
  void delete_item(int item_id);

  RgbImage composite_overlay(bool include_pending) const;

 private:
  enum class EditKind { AddPoint, Clear, Brush };
  struct UndoRecord {
    EditKind kind;
    std::vector<PromptPoint> points;  // Clear only
    std::optional<RleMask> mask;      // pending mask before the edit
  };

  void check_commit_preconditions(std::optional<Quantity> quantity) const;
  const AnnotationItem& commit(int category_id, std::optional<Quantity> quantity);
  std::optional<RleMask> saved_mask() const;

  std::string id_;
  RgbImage image_;
  std::string image_digest_;
  std::string source_filename_;
  std::shared_ptr<Backend> backend_;
  CategoryRegistry registry_;
  std::vector<PromptPoint> points_;
  std::optional<MaskBitmap> mask_;
  std::vector<UndoRecord> undo_;
  std::vector<AnnotationItem> items_;
  int next_item_id_ = 0;
  std::shared_ptr<const ImageEmbedding> embedding_;
  std::chrono::steady_clock::time_point created_;
  double prior_seconds_ = 0.0;
};

// Uses MealSAM when no backend is requested.
Session create_session(RgbImage image, std::string source_filename, CategoryRegistry registry,
                       BackendPool& backends, std::optional<BackendKind> backend = std::nullopt);

std::string random_token();

}  // namespace foodanno
