#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "foodanno/image.hpp"
#include "foodanno/mask.hpp"

namespace foodanno {

enum class BackendKind { MealSam, PretrainedB, PretrainedL, PretrainedH, RegionGrow };

inline constexpr BackendKind kAllBackendKinds[] = {
    BackendKind::MealSam, BackendKind::PretrainedB, BackendKind::PretrainedL,
    BackendKind::PretrainedH, BackendKind::RegionGrow};

// "mealsam", "sam_vit_b", "sam_vit_l", "sam_vit_h", "region_grow"
std::string_view backend_kind_name(BackendKind kind) noexcept;
std::optional<BackendKind> parse_backend_kind(std::string_view name) noexcept;

// The fine-tuned decoder was trained on foreground clicks only, so it does
// not take Exclude points. Every other backend does.
constexpr bool supports_background_points(BackendKind kind) noexcept {
  return kind != BackendKind::MealSam;
}
constexpr bool is_model_backed(BackendKind kind) noexcept {
  return kind != BackendKind::RegionGrow;
}

struct ModelFiles {
  std::filesystem::path encoder;
  std::filesystem::path decoder;

  friend bool operator==(const ModelFiles&, const ModelFiles&) = default;
};

struct BackendId {
  BackendKind kind = BackendKind::MealSam;
  std::optional<ModelFiles> model;  // absent for RegionGrow

  friend bool operator==(const BackendId&, const BackendId&) = default;
};

enum class Polarity { Include, Exclude };

// Pixel coordinate: origin top-left, x = column, y = row.
struct PromptPoint {
  int x = 0;
  int y = 0;
  Polarity polarity = Polarity::Include;

  friend bool operator==(const PromptPoint&, const PromptPoint&) = default;
};

struct Tensor {
  enum class Type { U8, F32 };
  Type type = Type::F32;
  std::vector<std::int64_t> shape;
  std::vector<std::uint8_t> data;  // raw element bytes, host order

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct ImageEmbedding {
  BackendKind backend = BackendKind::RegionGrow;
  std::string image_digest;
  int image_width = 0;
  int image_height = 0;
  Tensor tensor;
};

struct MaskPrediction {
  MaskBitmap mask;
  double score = 0.0;       // in [0, 1]
  double latency_ms = 0.0;  // decode step only
};

struct BackendOptions {
  std::size_t cache_capacity = 8;
  int region_grow_tolerance = 12;
};

struct CacheStats {
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t entries = 0;
};

// Thread-safe LRU keyed by image digest and size.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::size_t capacity) : capacity_(capacity) {}

  std::shared_ptr<const ImageEmbedding> find(const std::string& key);
  void insert(const std::string& key, std::shared_ptr<const ImageEmbedding> value);
  CacheStats stats() const;

 private:
  using Entry = std::pair<std::string, std::shared_ptr<const ImageEmbedding>>;

  mutable std::mutex mu_;
  std::size_t capacity_;
  std::list<Entry> lru_;  // front = most recently used
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

// A loaded promptable segmenter. Handles are shared between sessions and may
// be used from several threads; embed/predict on distinct images can overlap.
class Backend {
 public:
  virtual ~Backend() = default;
  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  const BackendId& id() const noexcept { return id_; }
  BackendKind kind() const noexcept { return id_.kind; }
  bool supports_background_points() const noexcept {
    return foodanno::supports_background_points(id_.kind);
  }
  // Label written into reports and project files.
  virtual std::string name() const { return std::string(backend_kind_name(id_.kind)); }

  // Cached by (digest, size). Throws OversizeImage, InvalidImage, RuntimeFailure.
  std::shared_ptr<const ImageEmbedding> embed_image(const RgbImage& image);

  // Exactly one mask, sized like the embedded image. Prompts are validated
  // first: EmptyPrompt, OutOfBounds, UnsupportedExcludePoint.
  MaskPrediction predict_mask(const ImageEmbedding& embedding,
                              std::span<const PromptPoint> prompts);

  CacheStats cache_stats() const { return cache_.stats(); }
  std::size_t encoder_runs() const noexcept { return encoder_runs_.load(); }

 protected:
  Backend(BackendId id, std::size_t cache_capacity)
      : id_(std::move(id)), cache_(cache_capacity) {}

  struct Decoded {
    MaskBitmap mask;
    double score = 1.0;
  };

  virtual Tensor encode(const RgbImage& image) = 0;
  virtual Decoded decode(const ImageEmbedding& embedding,
                         std::span<const PromptPoint> prompts) = 0;

 private:
  BackendId id_;
  EmbeddingCache cache_;
  std::atomic<std::size_t> encoder_runs_{0};
};

// Throws MissingModel when a model-backed kind has no resolvable files and
// CorruptModel when the runtime rejects them.
std::shared_ptr<Backend> load_backend(const BackendId& id, const BackendOptions& options = {});

using ModelManifest = std::map<BackendKind, ModelFiles>;

// Lazily loaded, shared backend handles keyed by kind.
class BackendPool {
 public:
  explicit BackendPool(ModelManifest models = {}, BackendOptions options = {})
      : models_(std::move(models)), options_(options) {}

  bool configured(BackendKind kind) const;
  // Throws MissingModel / CorruptModel; the handle is reused afterwards.
  std::shared_ptr<Backend> get(BackendKind kind);

  struct Status {
    BackendKind kind;
    bool configured = false;
    bool loadable = false;
    bool loaded = false;
    std::string error;
  };
  std::vector<Status> status() const;

 private:
  mutable std::mutex mu_;
  ModelManifest models_;
  BackendOptions options_;
  std::map<BackendKind, std::shared_ptr<Backend>> loaded_;
  std::map<BackendKind, std::string> errors_;
};

// 4-connected flood fill from each Include seed, admitting pixels whose
// per-channel absolute difference from that seed's color is <= tolerance.
// Connected components of the union that contain an Exclude point are dropped.
MaskBitmap region_grow(const RgbImage& image, std::span<const PromptPoint> includes,
                       std::span<const PromptPoint> excludes, int tolerance);

}  // namespace foodanno
