#pragma once

#include <cstdint>
#include <vector>

#include "foodanno/mask.hpp"

namespace foodanno {

// Alternating run lengths over the row-major bit sequence, always starting
// with a run of zeros (possibly of length 0). Only that leading run may be 0.
struct RleMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint64_t> runs;

  friend bool operator==(const RleMask&, const RleMask&) = default;
};

RleMask rle_encode(const MaskBitmap& mask);

// Throws Error(LengthMismatch) when the runs do not cover width*height and
// Error(MalformedRuns) on an interior zero-length run.
MaskBitmap rle_decode(const RleMask& rle);

}  // namespace foodanno
