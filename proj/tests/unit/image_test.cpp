#include <gtest/gtest.h>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "fixtures.hpp"
#include "foodanno/error.hpp"
#include "foodanno/image.hpp"

namespace {

using foodanno::Errc;
using foodanno::Rgb;
using foodanno::RgbImage;

std::vector<std::uint8_t> encode(const cv::Mat& m, const char* ext) {
  std::vector<std::uint8_t> out;
  cv::imencode(ext, m, out);
  return out;
}

TEST(ImageTest, PngRoundTripKeepsPixels) {
  RgbImage img(5, 3, {10, 20, 30});
  img.set(4, 2, {200, 100, 0});
  const RgbImage back = foodanno::decode_image(foodanno::encode_png(img));
  EXPECT_EQ(back, img);
}

TEST(ImageTest, DecodesBgrAsRgb) {
  cv::Mat bgr(1, 1, CV_8UC3, cv::Scalar(1, 2, 3));
  const RgbImage img = foodanno::decode_image(encode(bgr, ".png"));
  EXPECT_EQ(img.at(0, 0), (Rgb{3, 2, 1}));
}

TEST(ImageTest, AlphaCompositesOverWhite) {
  cv::Mat bgra(1, 3, CV_8UC4);
  bgra.at<cv::Vec4b>(0, 0) = {0, 0, 0, 0};      // transparent -> white
  bgra.at<cv::Vec4b>(0, 1) = {0, 0, 200, 255};  // opaque red
  bgra.at<cv::Vec4b>(0, 2) = {0, 0, 0, 128};    // half black
  const RgbImage img = foodanno::decode_image(encode(bgra, ".png"));
  EXPECT_EQ(img.at(0, 0), (Rgb{255, 255, 255}));
  EXPECT_EQ(img.at(1, 0), (Rgb{200, 0, 0}));
  // 255 * 127 / 255 = 127
  EXPECT_EQ(img.at(2, 0), (Rgb{127, 127, 127}));
}

TEST(ImageTest, GrayscaleExpandsToRgb) {
  cv::Mat gray(2, 2, CV_8UC1, cv::Scalar(77));
  const RgbImage img = foodanno::decode_image(encode(gray, ".png"));
  EXPECT_EQ(img.at(1, 1), (Rgb{77, 77, 77}));
}

TEST(ImageTest, JpegDecodes) {
  cv::Mat bgr(8, 8, CV_8UC3, cv::Scalar(0, 0, 255));
  const RgbImage img = foodanno::decode_image(encode(bgr, ".jpg"));
  EXPECT_EQ(img.width, 8);
  EXPECT_GT(img.at(3, 3).r, 240);
}

TEST(ImageTest, RejectsGarbage) {
  const std::string text = "definitely not an image";
  try {
    foodanno::decode_image(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    FAIL();
  } catch (const foodanno::Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidImage);
  }
  EXPECT_THROW(foodanno::decode_image({}), foodanno::Error);
}

TEST(ImageTest, DigestTracksPixelsNotEncoding) {
  const RgbImage a(4, 4, {1, 2, 3});
  RgbImage b = a;
  EXPECT_EQ(foodanno::pixel_digest(a), foodanno::pixel_digest(b));
  b.set(3, 3, {1, 2, 4});
  EXPECT_NE(foodanno::pixel_digest(a), foodanno::pixel_digest(b));
  EXPECT_EQ(foodanno::pixel_digest(foodanno::decode_image(foodanno::encode_png(a))), foodanno::pixel_digest(a));
  EXPECT_EQ(foodanno::pixel_digest(a).size(), 64u);
}

TEST(ImageTest, Sha256KnownVector) {
  const std::string abc = "abc";
  EXPECT_EQ(foodanno::sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size())),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
