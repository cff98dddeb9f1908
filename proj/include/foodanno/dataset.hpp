#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "foodanno/image.hpp"
#include "foodanno/mask.hpp"

namespace foodanno {

struct GroundTruthMask {
  int class_id = 0;
  MaskBitmap mask;
};

// Indexed label raster: pixel value = class id, 0 = background.
struct ClassRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> labels;
};

// Throws UnreadableRaster.
ClassRaster read_class_raster(const std::filesystem::path& path);

// One binary mask per nonzero class present, in ascending class order.
std::vector<GroundTruthMask> split_by_class(const ClassRaster& raster);

struct DatasetEntry {
  std::string name;  // file stem shared by image and mask
  std::filesystem::path image_path;
  std::filesystem::path mask_path;
};

struct EvalSample {
  std::string name;
  RgbImage image;
  std::vector<GroundTruthMask> masks;
};

// Pairs images/<name>.(png|jpg|jpeg) with masks/<name>.png, sorted by name.
// Throws MissingFile (directory) or MissingMaskForImage.
std::vector<DatasetEntry> index_eval_dataset(const std::filesystem::path& images_dir,
                                             const std::filesystem::path& masks_dir);

// Throws UnreadableRaster, InvalidImage, DimensionMismatch.
EvalSample load_eval_sample(const DatasetEntry& entry);

std::vector<EvalSample> load_eval_dataset(const std::filesystem::path& images_dir,
                                          const std::filesystem::path& masks_dir);

}  // namespace foodanno

namespace foodanno {

// 8-bit (or 16-bit when a label exceeds 255) single-channel PNG.
void write_class_raster(const ClassRaster& raster, const std::filesystem::path& path);

}  // namespace foodanno
