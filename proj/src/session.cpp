#include "foodanno/session.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>

#include "foodanno/error.hpp"

namespace foodanno {

std::string_view quantity_unit_name(QuantityUnit unit) noexcept {
  return unit == QuantityUnit::Gram ? "g" : "ml";
}

std::optional<QuantityUnit> parse_quantity_unit(std::string_view name) noexcept {
  if (name == "g") return QuantityUnit::Gram;
  if (name == "ml") return QuantityUnit::Milliliter;
  return std::nullopt;
}

std::vector<PixelCoord> rasterize_line(PixelCoord a, PixelCoord b) {
  std::vector<PixelCoord> out;
  const int dx = std::abs(b.x - a.x);
  const int dy = -std::abs(b.y - a.y);
  const int sx = a.x < b.x ? 1 : -1;
  const int sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  PixelCoord p = a;
  while (true) {
    out.push_back(p);
    if (p == b) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      p.x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      p.y += sy;
    }
  }
  return out;
}

void stamp_brush(MaskBitmap& mask, std::span<const PixelCoord> path, int radius, BrushMode mode) {
  if (path.empty()) throw Error(Errc::InvalidBrush, "brush path is empty");
  if (radius < 1) throw Error(Errc::InvalidBrush, "brush radius must be at least 1");

  std::vector<PixelCoord> disc;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) disc.push_back({dx, dy});
    }
  }
  const bool on = mode == BrushMode::Add;
  const auto stamp = [&](PixelCoord c) {
    for (const PixelCoord& d : disc) {
      const int x = c.x + d.x;
      const int y = c.y + d.y;
      if (mask.contains(x, y)) mask.set(x, y, on);
    }
  };

  if (path.size() == 1) {
    stamp(path.front());
    return;
  }
  for (std::size_t i = 1; i < path.size(); ++i) {
    for (const PixelCoord& c : rasterize_line(path[i - 1], path[i])) stamp(c);
  }
}

std::string random_token() {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (int word = 0; word < 2; ++word) {
    std::uint64_t v = gen();
    for (int i = 0; i < 16; ++i, v >>= 4) out.push_back(kHex[v & 0xF]);
  }
  return out;
}

Session::Session(RgbImage image, std::string source_filename, std::shared_ptr<Backend> backend,
                 CategoryRegistry registry)
    : id_(random_token()),
      image_(std::move(image)),
      source_filename_(std::move(source_filename)),
      backend_(std::move(backend)),
      registry_(std::move(registry)),
      created_(std::chrono::steady_clock::now()) {
  if (!backend_) throw Error(Errc::MissingModel, "session needs a segmentation backend");
  if (image_.empty() ||
      image_.pixels.size() != static_cast<std::size_t>(image_.width) * image_.height * 3) {
    throw Error(Errc::InvalidImage, "session image is empty");
  }
  if (image_.width > kMaxImageSide || image_.height > kMaxImageSide) {
    throw Error(Errc::OversizeImage, "image exceeds " + std::to_string(kMaxImageSide) + " px per side");
  }
  image_digest_ = pixel_digest(image_);
}

Session create_session(RgbImage image, std::string source_filename, CategoryRegistry registry,
                       BackendPool& backends, std::optional<BackendKind> backend) {
  if (image.empty()) throw Error(Errc::InvalidImage, "image has no pixels");
  return Session(std::move(image), std::move(source_filename),
                 backends.get(backend.value_or(BackendKind::MealSam)), std::move(registry));
}

Session Session::restore(RgbImage image, std::string source_filename,
                         std::shared_ptr<Backend> backend, CategoryRegistry registry,
                         std::vector<AnnotationItem> items, int next_item_id,
                         double prior_annotation_seconds) {
  Session s(std::move(image), std::move(source_filename), std::move(backend), std::move(registry));
  for (const AnnotationItem& item : items) {
    if (!s.registry_.contains(item.category_id)) {
      throw Error(Errc::UnknownCategory, "item " + std::to_string(item.item_id) +
                                             " references unknown category");
    }
    if (item.mask.width() != s.image_.width || item.mask.height() != s.image_.height) {
      throw Error(Errc::DimensionMismatch, "item mask does not match the image size");
    }
    next_item_id = std::max(next_item_id, item.item_id + 1);
  }
  s.items_ = std::move(items);
  s.next_item_id_ = next_item_id;
  s.prior_seconds_ = prior_annotation_seconds;
  return s;
}

double Session::annotation_seconds() const {
  return prior_seconds_ +
         std::chrono::duration<double>(std::chrono::steady_clock::now() - created_).count();
}

std::optional<RleMask> Session::saved_mask() const {
  if (!mask_) return std::nullopt;
  return rle_encode(*mask_);
}

void Session::add_point(PromptPoint p) {
  if (!image_.contains(p.x, p.y)) {
    throw Error(Errc::OutOfBounds, "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                       ") lies outside the " + std::to_string(image_.width) + "x" +
                                       std::to_string(image_.height) + " image");
  }
  if (p.polarity == Polarity::Exclude && !backend_->supports_background_points()) {
    throw Error(Errc::UnsupportedExcludePoint,
                backend_->name() + " does not accept background (exclude) points");
  }
  undo_.push_back({EditKind::AddPoint, {}, saved_mask()});
  points_.push_back(p);
  mask_.reset();
}

void Session::undo_last() {
  if (undo_.empty()) throw Error(Errc::NothingToUndo, "nothing to undo");
  UndoRecord record = std::move(undo_.back());
  std::optional<MaskBitmap> restored;
  if (record.mask) restored = rle_decode(*record.mask);
  switch (record.kind) {
    case EditKind::AddPoint:
      points_.pop_back();
      break;
    case EditKind::Clear:
      points_ = std::move(record.points);
      break;
    case EditKind::Brush:
      break;
  }
  mask_ = std::move(restored);
  undo_.pop_back();
}

void Session::clear_points() {
  if (points_.empty() && !mask_) return;
  undo_.push_back({EditKind::Clear, points_, saved_mask()});
  points_.clear();
  mask_.reset();
}

MaskPrediction Session::semi_segment() {
  const bool has_include = std::any_of(points_.begin(), points_.end(), [](const PromptPoint& p) {
    return p.polarity == Polarity::Include;
  });
  if (!has_include) throw Error(Errc::EmptyPrompt, "add at least one include point first");
  if (!embedding_) embedding_ = backend_->embed_image(image_);
  MaskPrediction prediction = backend_->predict_mask(*embedding_, points_);
  mask_ = prediction.mask;
  return prediction;
}

void Session::brush_stroke(std::span<const PixelCoord> path, int radius, BrushMode mode) {
  if (!mask_) throw Error(Errc::NoPendingMask, "segment before brushing");
  MaskBitmap edited = *mask_;
  stamp_brush(edited, path, radius, mode);
  undo_.push_back({EditKind::Brush, {}, saved_mask()});
  mask_ = std::move(edited);
}

int Session::add_category(std::string_view name) {
  return registry_.add(name, CategorySource::UserAdded);
}

void Session::check_commit_preconditions(std::optional<Quantity> quantity) const {
  if (!mask_) throw Error(Errc::NoPendingMask, "no mask to validate");
  if (!mask_->any()) throw Error(Errc::EmptyMask, "the pending mask is empty");
  if (quantity && (!std::isfinite(quantity->value) || quantity->value < 0.0)) {
    throw Error(Errc::InvalidQuantity, "quantity must be a finite, non-negative number");
  }
}

const AnnotationItem& Session::commit(int category_id, std::optional<Quantity> quantity) {
  items_.push_back({next_item_id_, std::move(*mask_), category_id, quantity});
  ++next_item_id_;
  points_.clear();
  mask_.reset();
  undo_.clear();
  return items_.back();
}

const AnnotationItem& Session::validate_item(int category_id, std::optional<Quantity> quantity) {
  check_commit_preconditions(quantity);
  if (!registry_.contains(category_id)) {
    throw Error(Errc::UnknownCategory, "unknown category id " + std::to_string(category_id));
  }
  return commit(category_id, quantity);
}

const AnnotationItem& Session::validate_item_with_new_category(std::string_view name,
                                                               std::optional<Quantity> quantity) {
  check_commit_preconditions(quantity);
  const int id = registry_.add(name, CategorySource::UserAdded);
  return commit(id, quantity);
}

void Session::delete_item(int item_id) {
  const auto it = std::find_if(items_.begin(), items_.end(),
                               [&](const AnnotationItem& i) { return i.item_id == item_id; });
  if (it == items_.end()) throw Error(Errc::UnknownItem, "unknown item id " + std::to_string(item_id));
  items_.erase(it);
}

RgbImage Session::composite_overlay(bool include_pending) const {
  RgbImage out = image_;
  const auto paint = [&](const MaskBitmap& mask, Rgb color) {
    const std::size_t n = mask.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i]) continue;
      out.pixels[3 * i] = blend_half(image_.pixels[3 * i], color.r);
      out.pixels[3 * i + 1] = blend_half(image_.pixels[3 * i + 1], color.g);
      out.pixels[3 * i + 2] = blend_half(image_.pixels[3 * i + 2], color.b);
    }
  };

  std::vector<const AnnotationItem*> ordered;
  for (const auto& item : items_) ordered.push_back(&item);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->item_id < b->item_id; });
  for (const AnnotationItem* item : ordered) {
    paint(item->mask, registry_.at(item->category_id).color);
  }
  if (include_pending && mask_) paint(*mask_, kPendingHighlight);
  return out;
}

}  // namespace foodanno
