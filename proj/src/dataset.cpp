#include "foodanno/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "foodanno/error.hpp"

namespace foodanno {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_image_extension(const std::filesystem::path& p) {
  const std::string ext = lower(p.extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

ClassRaster read_class_raster(const std::filesystem::path& path) {
  cv::Mat raw;
  try {
    raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw Error(Errc::UnreadableRaster, "cannot read " + path.string() + ": " + e.what());
  }
  if (raw.empty()) throw Error(Errc::UnreadableRaster, "cannot read " + path.string());
  if (raw.depth() != CV_8U && raw.depth() != CV_16U) {
    throw Error(Errc::UnreadableRaster, path.string() + ": label rasters must be 8 or 16 bit");
  }
  const int channels = raw.channels();
  if (channels != 1 && channels != 3) {
    throw Error(Errc::UnreadableRaster, path.string() + ": label rasters must be single channel");
  }

  ClassRaster out{raw.cols, raw.rows, {}};
  out.labels.resize(static_cast<std::size_t>(raw.cols) * raw.rows);
  for (int y = 0; y < raw.rows; ++y) {
    for (int x = 0; x < raw.cols; ++x) {
      std::uint16_t v[3] = {0, 0, 0};
      for (int c = 0; c < channels; ++c) {
        v[c] = raw.depth() == CV_8U
                   ? raw.ptr<std::uint8_t>(y)[static_cast<std::size_t>(x) * channels + c]
                   : raw.ptr<std::uint16_t>(y)[static_cast<std::size_t>(x) * channels + c];
      }
      // Grey label maps saved as RGB are accepted; colored ones are not.
      if (channels == 3 && (v[0] != v[1] || v[1] != v[2])) {
        throw Error(Errc::UnreadableRaster, path.string() + ": color raster is not an index map");
      }
      out.labels[static_cast<std::size_t>(y) * raw.cols + x] = v[0];
    }
  }
  return out;
}

std::vector<GroundTruthMask> split_by_class(const ClassRaster& raster) {
  std::map<int, MaskBitmap> by_class;
  for (std::size_t i = 0; i < raster.labels.size(); ++i) {
    const int label = raster.labels[i];
    if (label == 0) continue;
    auto it = by_class.find(label);
    if (it == by_class.end()) it = by_class.emplace(label, MaskBitmap(raster.width, raster.height)).first;
    it->second.set_flat(i, true);
  }
  std::vector<GroundTruthMask> out;
  for (auto& [label, mask] : by_class) out.push_back({label, std::move(mask)});
  return out;
}

std::vector<DatasetEntry> index_eval_dataset(const std::filesystem::path& images_dir,
                                             const std::filesystem::path& masks_dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(images_dir, ec)) {
    throw Error(Errc::MissingFile, "image directory not found: " + images_dir.string());
  }
  if (!std::filesystem::is_directory(masks_dir, ec)) {
    throw Error(Errc::MissingFile, "mask directory not found: " + masks_dir.string());
  }
  std::vector<DatasetEntry> entries;
  for (const auto& file : std::filesystem::directory_iterator(images_dir)) {
    if (!file.is_regular_file() || !is_image_extension(file.path())) continue;
    const std::string stem = file.path().stem().string();
    const auto mask_path = masks_dir / (stem + ".png");
    if (!std::filesystem::is_regular_file(mask_path, ec)) {
      throw Error(Errc::MissingMaskForImage, "no mask raster for image " + file.path().filename().string());
    }
    entries.push_back({stem, file.path(), mask_path});
  }
  std::sort(entries.begin(), entries.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) { return a.name < b.name; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].name == entries[i - 1].name) {
      throw Error(Errc::InvalidConfig, "two images share the name " + entries[i].name);
    }
  }
  return entries;
}

EvalSample load_eval_sample(const DatasetEntry& entry) {
  EvalSample sample;
  sample.name = entry.name;
  sample.image = read_image_file(entry.image_path);
  const ClassRaster raster = read_class_raster(entry.mask_path);
  if (raster.width != sample.image.width || raster.height != sample.image.height) {
    throw Error(Errc::DimensionMismatch, "mask raster size differs from image " + entry.name);
  }
  sample.masks = split_by_class(raster);
  return sample;
}

std::vector<EvalSample> load_eval_dataset(const std::filesystem::path& images_dir,
                                          const std::filesystem::path& masks_dir) {
  std::vector<EvalSample> out;
  for (const DatasetEntry& entry : index_eval_dataset(images_dir, masks_dir)) {
    out.push_back(load_eval_sample(entry));
  }
  return out;
}

}  // namespace foodanno

namespace foodanno {

void write_class_raster(const ClassRaster& raster, const std::filesystem::path& path) {
  const bool wide = std::any_of(raster.labels.begin(), raster.labels.end(),
                                [](std::uint16_t v) { return v > 255; });
  cv::Mat out(raster.height, raster.width, wide ? CV_16U : CV_8U);
  for (int y = 0; y < raster.height; ++y) {
    for (int x = 0; x < raster.width; ++x) {
      const std::uint16_t v = raster.labels[static_cast<std::size_t>(y) * raster.width + x];
      if (wide) {
        out.at<std::uint16_t>(y, x) = v;
      } else {
        out.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(v);
      }
    }
  }
  if (!cv::imwrite(path.string(), out)) throw Error(Errc::IoFailure, "cannot write " + path.string());
}

}  // namespace foodanno
