#include <cstdlib>
#include <deque>
#include <string>

#include "foodanno/backend.hpp"
#include "foodanno/error.hpp"

namespace foodanno {

namespace {

constexpr int kDx[4] = {1, -1, 0, 0};
constexpr int kDy[4] = {0, 0, 1, -1};

bool within_tolerance(Rgb a, Rgb b, int tolerance) {
  return std::abs(a.r - b.r) <= tolerance && std::abs(a.g - b.g) <= tolerance &&
         std::abs(a.b - b.b) <= tolerance;
}

void check_bounds(const RgbImage& image, const PromptPoint& p) {
  if (!image.contains(p.x, p.y)) {
    throw Error(Errc::OutOfBounds, "seed (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                       ") lies outside the image");
  }
}

}  // namespace

MaskBitmap region_grow(const RgbImage& image, std::span<const PromptPoint> includes,
                       std::span<const PromptPoint> excludes, int tolerance) {
  if (includes.empty()) throw Error(Errc::EmptyPrompt, "region growing needs an include seed");
  for (const auto& p : includes) check_bounds(image, p);
  for (const auto& p : excludes) check_bounds(image, p);

  MaskBitmap mask(image.width, image.height);
  std::vector<std::uint8_t> seen(mask.size());
  std::deque<std::pair<int, int>> frontier;

  for (const PromptPoint& seed : includes) {
    std::fill(seen.begin(), seen.end(), 0);
    const Rgb seed_color = image.at(seed.x, seed.y);
    frontier.emplace_back(seed.x, seed.y);
    seen[static_cast<std::size_t>(seed.y) * image.width + seed.x] = 1;
    while (!frontier.empty()) {
      const auto [x, y] = frontier.front();
      frontier.pop_front();
      mask.set(x, y, true);
      for (int d = 0; d < 4; ++d) {
        const int nx = x + kDx[d];
        const int ny = y + kDy[d];
        if (!image.contains(nx, ny)) continue;
        auto& s = seen[static_cast<std::size_t>(ny) * image.width + nx];
        if (s || !within_tolerance(image.at(nx, ny), seed_color, tolerance)) continue;
        s = 1;
        frontier.emplace_back(nx, ny);
      }
    }
  }

  // Drop every component of the union that an exclude point touches.
  for (const PromptPoint& ex : excludes) {
    if (!mask.get(ex.x, ex.y)) continue;
    frontier.emplace_back(ex.x, ex.y);
    mask.set(ex.x, ex.y, false);
    while (!frontier.empty()) {
      const auto [x, y] = frontier.front();
      frontier.pop_front();
      for (int d = 0; d < 4; ++d) {
        const int nx = x + kDx[d];
        const int ny = y + kDy[d];
        if (!mask.contains(nx, ny) || !mask.get(nx, ny)) continue;
        mask.set(nx, ny, false);
        frontier.emplace_back(nx, ny);
      }
    }
  }
  return mask;
}

}  // namespace foodanno
