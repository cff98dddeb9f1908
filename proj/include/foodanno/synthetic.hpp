#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "foodanno/dataset.hpp"
#include "foodanno/image.hpp"
#include "foodanno/mask.hpp"
#include "foodanno/session.hpp"

namespace foodanno {

// Uniformly colored, non-touching rectangles and ellipses on a plain
// background. Every blob color differs from the background and from every
// other blob by more than 60 in at least one channel.
struct SyntheticBlob {
  int class_id = 0;
  Rgb color;
  MaskBitmap mask;
  PixelCoord centroid;  // geometric center, always inside the blob
};

struct SyntheticImage {
  std::string name;
  RgbImage image;
  std::vector<SyntheticBlob> blobs;
  ClassRaster labels;
};

SyntheticImage make_synthetic_image(std::uint64_t seed, int width, int height, int max_blobs);

// Writes images/<name>.png and masks/<name>.png under `root`.
std::vector<SyntheticImage> write_synthetic_dataset(const std::filesystem::path& root, int count,
                                                    std::uint64_t seed, int width = 96,
                                                    int height = 80);

}  // namespace foodanno
