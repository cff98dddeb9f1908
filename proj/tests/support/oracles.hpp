#pragma once

// Brute-force reference computations. Deliberately written along different
// routes from the library so they can check it.

#include <cstdint>
#include <utility>
#include <vector>

#include "foodanno/image.hpp"
#include "foodanno/mask.hpp"

namespace oracle {

// Repeated relaxation until fixpoint: a pixel joins when it matches the seed
// color within tolerance and touches an already admitted pixel.
foodanno::MaskBitmap flood_fill(const foodanno::RgbImage& image, int seed_x, int seed_y, int tolerance);

// Union-find labeling of 4-connected foreground; 0 = background, labels from 1.
std::vector<int> label_components(const foodanno::MaskBitmap& mask);

// (|a & b|, |a | b|) by a double loop over coordinates.
std::pair<std::uint64_t, std::uint64_t> overlap_counts(const foodanno::MaskBitmap& a,
                                                      const foodanno::MaskBitmap& b);

// HSV -> RGB through the f(n) = v - v s max(0, min(k, 4 - k, 1)) form.
foodanno::Rgb hsv_color(double hue, double saturation, double value);

foodanno::MaskBitmap random_mask(std::uint64_t seed, int width, int height, double density);

}  // namespace oracle
