#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace foodanno {

// Largest accepted width or height. Larger inputs are rejected, not resized.
inline constexpr int kMaxImageSide = 4096;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Interleaved 8-bit RGB, row-major, origin top-left.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {});

  bool empty() const noexcept { return width <= 0 || height <= 0; }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// Decodes PNG or JPEG bytes to RGB. Alpha is composited over white and
// 16-bit samples are reduced to 8 bits. Throws Error(InvalidImage).
RgbImage decode_image(std::span<const std::uint8_t> bytes);
RgbImage read_image_file(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const RgbImage& image);
void write_png(const RgbImage& image, const std::filesystem::path& path);

// Lowercase hex SHA-256 of the decoded RGB bytes (not the file bytes).
std::string pixel_digest(const RgbImage& image);
std::string sha256_hex(std::span<const std::uint8_t> bytes);

}  // namespace foodanno
