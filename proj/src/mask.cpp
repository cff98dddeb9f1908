#include "foodanno/mask.hpp"

#include <algorithm>

namespace foodanno {

MaskBitmap::MaskBitmap(int width, int height)
    : width_(width), height_(height),
      bits_(static_cast<std::size_t>(width) * height, 0) {}

std::size_t MaskBitmap::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool MaskBitmap::any() const noexcept {
  return std::find(bits_.begin(), bits_.end(), std::uint8_t{1}) != bits_.end();
}

}  // namespace foodanno
