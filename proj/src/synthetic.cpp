#include "foodanno/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "foodanno/error.hpp"
#include "foodanno/eval.hpp"

namespace foodanno {

namespace {

constexpr Rgb kBlobPalette[] = {
    {220, 40, 40},  {40, 170, 60},  {40, 60, 210},  {230, 200, 40},
    {150, 50, 170}, {240, 130, 30}, {110, 60, 20},  {30, 190, 190},
};
constexpr Rgb kBackgrounds[] = {{245, 245, 240}, {25, 25, 30}};

struct Box {
  int x0, y0, x1, y1;  // inclusive

  bool overlaps(const Box& o, int gap) const {
    return !(x1 + gap < o.x0 || o.x1 + gap < x0 || y1 + gap < o.y0 || o.y1 + gap < y0);
  }
};

int draw(std::mt19937_64& gen, int lo, int hi) {
  return lo + static_cast<int>(uniform_below(static_cast<std::uint64_t>(hi - lo + 1), gen));
}

}  // namespace

SyntheticImage make_synthetic_image(std::uint64_t seed, int width, int height, int max_blobs) {
  if (width < 16 || height < 16) throw Error(Errc::InvalidConfig, "synthetic images need >= 16 px sides");
  std::mt19937_64 gen(seed);
  SyntheticImage out;
  const Rgb background = kBackgrounds[uniform_below(2, gen)];
  out.image = RgbImage(width, height, background);
  out.labels = {width, height, std::vector<std::uint16_t>(static_cast<std::size_t>(width) * height, 0)};

  std::vector<int> palette(std::size(kBlobPalette));
  for (std::size_t i = 0; i < palette.size(); ++i) palette[i] = static_cast<int>(i);
  for (std::size_t i = 0; i + 1 < palette.size(); ++i) {
    std::swap(palette[i], palette[i + uniform_below(palette.size() - i, gen)]);
  }
  std::vector<int> classes;

  const int wanted = draw(gen, 1, std::max(1, std::min<int>(max_blobs, static_cast<int>(palette.size()))));
  std::vector<Box> placed;
  for (int attempt = 0; attempt < 200 && static_cast<int>(placed.size()) < wanted; ++attempt) {
    const int bw = draw(gen, 6, std::max(6, width / 3));
    const int bh = draw(gen, 6, std::max(6, height / 3));
    const Box box{draw(gen, 1, width - bw - 1), draw(gen, 1, height - bh - 1), 0, 0};
    const Box full{box.x0, box.y0, box.x0 + bw - 1, box.y0 + bh - 1};
    if (std::any_of(placed.begin(), placed.end(), [&](const Box& b) { return b.overlaps(full, 2); })) {
      continue;
    }
    int class_id = 0;
    do {
      class_id = draw(gen, 1, 103);
    } while (std::find(classes.begin(), classes.end(), class_id) != classes.end());
    classes.push_back(class_id);
    placed.push_back(full);

    SyntheticBlob blob;
    blob.class_id = class_id;
    blob.color = kBlobPalette[palette[placed.size() - 1]];
    blob.mask = MaskBitmap(width, height);
    const bool ellipse = uniform_below(2, gen) == 1;
    const double cx = (full.x0 + full.x1) / 2.0;
    const double cy = (full.y0 + full.y1) / 2.0;
    const double rx = bw / 2.0;
    const double ry = bh / 2.0;
    for (int y = full.y0; y <= full.y1; ++y) {
      for (int x = full.x0; x <= full.x1; ++x) {
        if (ellipse) {
          const double nx = (x - cx) / rx;
          const double ny = (y - cy) / ry;
          if (nx * nx + ny * ny > 1.0) continue;
        }
        blob.mask.set(x, y, true);
        out.image.set(x, y, blob.color);
        out.labels.labels[static_cast<std::size_t>(y) * width + x] = static_cast<std::uint16_t>(class_id);
      }
    }
    blob.centroid = {(full.x0 + full.x1) / 2, (full.y0 + full.y1) / 2};
    out.blobs.push_back(std::move(blob));
  }
  return out;
}

std::vector<SyntheticImage> write_synthetic_dataset(const std::filesystem::path& root, int count,
                                                    std::uint64_t seed, int width, int height) {
  std::filesystem::create_directories(root / "images");
  std::filesystem::create_directories(root / "masks");
  std::vector<SyntheticImage> out;
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "synthetic_%04d", i);
    SyntheticImage img = make_synthetic_image(seed * 1000003ULL + static_cast<std::uint64_t>(i), width, height, 4);
    img.name = name;
    write_png(img.image, root / "images" / (img.name + ".png"));
    write_class_raster(img.labels, root / "masks" / (img.name + ".png"));
    out.push_back(std::move(img));
  }
  return out;
}

}  // namespace foodanno
