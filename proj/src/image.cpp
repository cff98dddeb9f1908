#include "foodanno/image.hpp"

#include <fstream>
#include <iterator>

#include <openssl/evp.h>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "foodanno/error.hpp"

namespace foodanno {

RgbImage::RgbImage(int w, int h, Rgb fill) : width(w), height(h) {
  pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
  }
}

Rgb RgbImage::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void RgbImage::set(int x, int y, Rgb c) {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  pixels[i] = c.r;
  pixels[i + 1] = c.g;
  pixels[i + 2] = c.b;
}

namespace {

std::uint8_t over_white(int value, int alpha) {
  // value*a/255 + 255*(255-a)/255, rounded half-up
  return static_cast<std::uint8_t>((value * alpha + 255 * (255 - alpha) + 127) / 255);
}

}  // namespace

RgbImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw Error(Errc::InvalidImage, "empty image payload");
  cv::Mat raw;
  try {
    const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8U,
                      const_cast<std::uint8_t*>(bytes.data()));
    raw = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw Error(Errc::InvalidImage, std::string("cannot decode image: ") + e.what());
  }
  if (raw.empty() || raw.cols <= 0 || raw.rows <= 0) {
    throw Error(Errc::InvalidImage, "cannot decode image");
  }
  if (raw.depth() == CV_16U) {
    cv::Mat narrowed;
    raw.convertTo(narrowed, CV_8U, 1.0 / 257.0);
    raw = narrowed;
  } else if (raw.depth() != CV_8U) {
    throw Error(Errc::InvalidImage, "unsupported sample depth");
  }

  RgbImage out;
  out.width = raw.cols;
  out.height = raw.rows;
  out.pixels.resize(static_cast<std::size_t>(raw.cols) * raw.rows * 3);
  const int channels = raw.channels();
  for (int y = 0; y < raw.rows; ++y) {
    const std::uint8_t* row = raw.ptr<std::uint8_t>(y);
    std::uint8_t* dst = out.pixels.data() + static_cast<std::size_t>(y) * raw.cols * 3;
    for (int x = 0; x < raw.cols; ++x, dst += 3) {
      const std::uint8_t* px = row + static_cast<std::size_t>(x) * channels;
      switch (channels) {
        case 1:
          dst[0] = dst[1] = dst[2] = px[0];
          break;
        case 2:
          dst[0] = dst[1] = dst[2] = over_white(px[0], px[1]);
          break;
        case 3:  // OpenCV order is BGR
          dst[0] = px[2];
          dst[1] = px[1];
          dst[2] = px[0];
          break;
        case 4:
          dst[0] = over_white(px[2], px[3]);
          dst[1] = over_white(px[1], px[3]);
          dst[2] = over_white(px[0], px[3]);
          break;
        default:
          throw Error(Errc::InvalidImage, "unsupported channel count");
      }
    }
  }
  return out;
}

RgbImage read_image_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return decode_image(bytes);
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  if (image.empty()) throw Error(Errc::InvalidImage, "cannot encode an empty image");
  cv::Mat bgr(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    const std::uint8_t* src = image.pixels.data() + static_cast<std::size_t>(y) * image.width * 3;
    std::uint8_t* dst = bgr.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width; ++x) {
      dst[3 * x] = src[3 * x + 2];
      dst[3 * x + 1] = src[3 * x + 1];
      dst[3 * x + 2] = src[3 * x];
    }
  }
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", bgr, out)) throw Error(Errc::IoFailure, "PNG encoding failed");
  return out;
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::RuntimeFailure, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[md[i] >> 4]);
    hex.push_back(kHex[md[i] & 0xF]);
  }
  return hex;
}

std::string pixel_digest(const RgbImage& image) {
  return sha256_hex(image.pixels);
}

}  // namespace foodanno
