#include "foodanno/backend.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "foodanno/error.hpp"
#include "onnx_sam_backend.hpp"

namespace foodanno {

std::string_view backend_kind_name(BackendKind kind) noexcept {
  switch (kind) {
    case BackendKind::MealSam: return "mealsam";
    case BackendKind::PretrainedB: return "sam_vit_b";
    case BackendKind::PretrainedL: return "sam_vit_l";
    case BackendKind::PretrainedH: return "sam_vit_h";
    case BackendKind::RegionGrow: return "region_grow";
  }
  return "unknown";
}

std::optional<BackendKind> parse_backend_kind(std::string_view name) noexcept {
  for (const BackendKind k : kAllBackendKinds) {
    if (backend_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

std::shared_ptr<const ImageEmbedding> EmbeddingCache::find(const std::string& key) {
  std::lock_guard lock(mu_);
  const auto it = index_.find(key);
  if (it == index_.end()) {
    ++misses_;
    return nullptr;
  }
  ++hits_;
  lru_.splice(lru_.begin(), lru_, it->second);
  return it->second->second;
}

void EmbeddingCache::insert(const std::string& key, std::shared_ptr<const ImageEmbedding> value) {
  if (capacity_ == 0) return;
  std::lock_guard lock(mu_);
  if (const auto it = index_.find(key); it != index_.end()) {
    it->second->second = std::move(value);
    lru_.splice(lru_.begin(), lru_, it->second);
    return;
  }
  lru_.emplace_front(key, std::move(value));
  index_[key] = lru_.begin();
  while (lru_.size() > capacity_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
}

CacheStats EmbeddingCache::stats() const {
  std::lock_guard lock(mu_);
  return {hits_, misses_, lru_.size()};
}

std::shared_ptr<const ImageEmbedding> Backend::embed_image(const RgbImage& image) {
  if (image.empty() || image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw Error(Errc::InvalidImage, "image is empty or its buffer does not match its size");
  }
  if (image.width > kMaxImageSide || image.height > kMaxImageSide) {
    throw Error(Errc::OversizeImage, "image " + std::to_string(image.width) + "x" +
                                         std::to_string(image.height) + " exceeds " +
                                         std::to_string(kMaxImageSide) + " px per side");
  }
  std::string digest = pixel_digest(image);
  const std::string key =
      digest + ':' + std::to_string(image.width) + 'x' + std::to_string(image.height);
  if (auto hit = cache_.find(key)) return hit;

  auto embedding = std::make_shared<ImageEmbedding>();
  embedding->backend = kind();
  embedding->image_digest = std::move(digest);
  embedding->image_width = image.width;
  embedding->image_height = image.height;
  embedding->tensor = encode(image);
  ++encoder_runs_;
  cache_.insert(key, embedding);
  return embedding;
}

MaskPrediction Backend::predict_mask(const ImageEmbedding& embedding,
                                     std::span<const PromptPoint> prompts) {
  if (prompts.empty()) throw Error(Errc::EmptyPrompt, "no prompt points given");
  bool has_include = false;
  for (const PromptPoint& p : prompts) {
    if (p.x < 0 || p.y < 0 || p.x >= embedding.image_width || p.y >= embedding.image_height) {
      throw Error(Errc::OutOfBounds, "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                         ") lies outside the image");
    }
    if (p.polarity == Polarity::Exclude && !supports_background_points()) {
      throw Error(Errc::UnsupportedExcludePoint,
                  name() + " does not accept background (exclude) points");
    }
    has_include = has_include || p.polarity == Polarity::Include;
  }
  if (!has_include) throw Error(Errc::EmptyPrompt, "at least one include point is required");

  const auto start = std::chrono::steady_clock::now();
  Decoded decoded = decode(embedding, prompts);
  const auto stop = std::chrono::steady_clock::now();

  if (decoded.mask.width() != embedding.image_width ||
      decoded.mask.height() != embedding.image_height) {
    throw Error(Errc::RuntimeFailure, "backend returned a mask of the wrong size");
  }
  MaskPrediction out;
  out.mask = std::move(decoded.mask);
  out.score = std::clamp(decoded.score, 0.0, 1.0);
  out.latency_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return out;
}

namespace {

class RegionGrowBackend final : public Backend {
 public:
  RegionGrowBackend(BackendId id, const BackendOptions& options)
      : Backend(std::move(id), options.cache_capacity), tolerance_(options.region_grow_tolerance) {}

 protected:
  // The "embedding" is the pixel buffer itself.
  Tensor encode(const RgbImage& image) override {
    Tensor t;
    t.type = Tensor::Type::U8;
    t.shape = {image.height, image.width, 3};
    t.data = image.pixels;
    return t;
  }

  Decoded decode(const ImageEmbedding& embedding, std::span<const PromptPoint> prompts) override {
    RgbImage image;
    image.width = embedding.image_width;
    image.height = embedding.image_height;
    image.pixels = embedding.tensor.data;
    std::vector<PromptPoint> includes;
    std::vector<PromptPoint> excludes;
    for (const PromptPoint& p : prompts) {
      (p.polarity == Polarity::Include ? includes : excludes).push_back(p);
    }
    return {region_grow(image, includes, excludes, tolerance_), 1.0};
  }

 private:
  int tolerance_;
};

}  // namespace

std::shared_ptr<Backend> load_backend(const BackendId& id, const BackendOptions& options) {
  if (!is_model_backed(id.kind)) {
    if (options.region_grow_tolerance < 0 || options.region_grow_tolerance > 255) {
      throw Error(Errc::InvalidConfig, "region grow tolerance must be in 0..255");
    }
    return std::make_shared<RegionGrowBackend>(BackendId{id.kind, std::nullopt}, options);
  }
  if (!id.model) {
    throw Error(Errc::MissingModel,
                std::string(backend_kind_name(id.kind)) + " needs encoder and decoder model files");
  }
  return detail::load_onnx_sam_backend(id, options);
}

bool BackendPool::configured(BackendKind kind) const {
  return !is_model_backed(kind) || models_.count(kind) > 0;
}

std::shared_ptr<Backend> BackendPool::get(BackendKind kind) {
  std::lock_guard lock(mu_);
  if (const auto it = loaded_.find(kind); it != loaded_.end()) return it->second;
  BackendId id{kind, std::nullopt};
  if (const auto it = models_.find(kind); it != models_.end()) id.model = it->second;
  try {
    auto handle = load_backend(id, options_);
    loaded_[kind] = handle;
    errors_.erase(kind);
    return handle;
  } catch (const std::exception& e) {
    errors_[kind] = e.what();
    throw;
  }
}

std::vector<BackendPool::Status> BackendPool::status() const {
  std::lock_guard lock(mu_);
  std::vector<Status> out;
  for (const BackendKind kind : kAllBackendKinds) {
    Status s{kind, false, false, false, {}};
    s.configured = configured(kind);
    s.loaded = loaded_.count(kind) > 0;
    if (const auto it = errors_.find(kind); it != errors_.end()) s.error = it->second;
    if (!is_model_backed(kind)) {
      s.loadable = true;
    } else if (const auto it = models_.find(kind); it != models_.end()) {
      std::error_code ec;
      s.loadable = s.loaded || (s.error.empty() &&
                                std::filesystem::is_regular_file(it->second.encoder, ec) &&
                                std::filesystem::is_regular_file(it->second.decoder, ec));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace foodanno
