#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace foodanno {

// Binary mask matched to an image. One byte per pixel (0 or 1), row-major.
class MaskBitmap {
 public:
  MaskBitmap() = default;
  MaskBitmap(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool get(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool on) { bits_[index(x, y)] = on ? 1 : 0; }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  // Flat row-major access.
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set_flat(std::size_t i, bool on) { bits_[i] = on ? 1 : 0; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  std::size_t count() const noexcept;
  bool any() const noexcept;
  bool same_shape(const MaskBitmap& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const MaskBitmap&, const MaskBitmap&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

}  // namespace foodanno
