#include "foodanno/rle.hpp"

#include <string>

#include "foodanno/error.hpp"

namespace foodanno {

RleMask rle_encode(const MaskBitmap& mask) {
  RleMask out{mask.width(), mask.height(), {}};
  const auto& bits = mask.bits();
  std::uint8_t current = 0;
  std::uint64_t run = 0;
  for (const std::uint8_t b : bits) {
    if (b == current) {
      ++run;
    } else {
      out.runs.push_back(run);
      current = b;
      run = 1;
    }
  }
  out.runs.push_back(run);
  return out;
}

MaskBitmap rle_decode(const RleMask& rle) {
  if (rle.width < 0 || rle.height < 0) {
    throw Error(Errc::LengthMismatch, "negative mask dimensions");
  }
  const std::uint64_t total = static_cast<std::uint64_t>(rle.width) * rle.height;
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < rle.runs.size(); ++i) {
    if (i > 0 && rle.runs[i] == 0) {
      throw Error(Errc::MalformedRuns, "zero-length run at index " + std::to_string(i));
    }
    sum += rle.runs[i];
    if (sum > total) break;
  }
  if (sum != total) {
    throw Error(Errc::LengthMismatch, "runs cover " + std::to_string(sum) +
                                          " pixels, mask has " + std::to_string(total));
  }

  MaskBitmap mask(rle.width, rle.height);
  std::size_t pos = 0;
  bool on = false;
  for (const std::uint64_t run : rle.runs) {
    if (on) {
      for (std::uint64_t k = 0; k < run; ++k) mask.set_flat(pos + k, true);
    }
    pos += run;
    on = !on;
  }
  return mask;
}

}  // namespace foodanno
