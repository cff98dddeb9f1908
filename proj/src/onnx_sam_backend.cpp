#include "onnx_sam_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>
#include <opencv2/imgproc.hpp>

#include "foodanno/error.hpp"

namespace foodanno::detail {

namespace {

// Encoder input geometry of the exported SAM image encoders.
constexpr int kEncoderSide = 1024;
constexpr float kPixelMean[3] = {123.675f, 116.28f, 103.53f};
constexpr float kPixelStd[3] = {58.395f, 57.12f, 57.375f};
constexpr int kMaskInputSide = 256;

struct ResizeLongestSide {
  int width;
  int height;
  int resized_width;
  int resized_height;

  ResizeLongestSide(int w, int h) : width(w), height(h) {
    const double scale = static_cast<double>(kEncoderSide) / std::max(w, h);
    resized_width = static_cast<int>(w * scale + 0.5);
    resized_height = static_cast<int>(h * scale + 0.5);
  }

  float map_x(int x) const { return static_cast<float>(x) * resized_width / width; }
  float map_y(int y) const { return static_cast<float>(y) * resized_height / height; }
};

cv::Mat tensor_to_mat(const Tensor& t) {
  std::vector<int> dims(t.shape.begin(), t.shape.end());
  cv::Mat m(static_cast<int>(dims.size()), dims.data(), CV_32F);
  std::memcpy(m.data, t.data.data(), t.data.size());
  return m;
}

class OnnxSamBackend final : public Backend {
 public:
  OnnxSamBackend(BackendId id, const BackendOptions& options, cv::dnn::Net encoder, cv::dnn::Net decoder)
      : Backend(std::move(id), options.cache_capacity),
        encoder_(std::move(encoder)),
        decoder_(std::move(decoder)) {}

 protected:
  Tensor encode(const RgbImage& image) override {
    const ResizeLongestSide geometry(image.width, image.height);
    const cv::Mat rgb(image.height, image.width, CV_8UC3, const_cast<std::uint8_t*>(image.pixels.data()));
    cv::Mat resized;
    cv::resize(rgb, resized, cv::Size(geometry.resized_width, geometry.resized_height), 0, 0,
               cv::INTER_LINEAR);

    // NCHW, normalized, zero padded to the bottom/right
    const int blob_dims[4] = {1, 3, kEncoderSide, kEncoderSide};
    cv::Mat blob(4, blob_dims, CV_32F, cv::Scalar(0.0f));
    const std::size_t plane = static_cast<std::size_t>(kEncoderSide) * kEncoderSide;
    float* base = blob.ptr<float>();
    for (int y = 0; y < resized.rows; ++y) {
      const std::uint8_t* row = resized.ptr<std::uint8_t>(y);
      for (int x = 0; x < resized.cols; ++x) {
        const std::size_t offset = static_cast<std::size_t>(y) * kEncoderSide + x;
        for (int c = 0; c < 3; ++c) {
          base[c * plane + offset] = (row[3 * x + c] - kPixelMean[c]) / kPixelStd[c];
        }
      }
    }

    cv::Mat out;
    try {
      std::lock_guard lock(encoder_mu_);
      encoder_.setInput(blob, "input_image");
      out = encoder_.forward().clone();
    } catch (const cv::Exception& e) {
      throw Error(Errc::RuntimeFailure, std::string("encoder failed: ") + e.what());
    }
    if (out.type() != CV_32F) throw Error(Errc::RuntimeFailure, "encoder output is not float32");

    Tensor t;
    t.type = Tensor::Type::F32;
    for (int i = 0; i < out.dims; ++i) t.shape.push_back(out.size[i]);
    t.data.resize(out.total() * sizeof(float));
    std::memcpy(t.data.data(), out.ptr<float>(), t.data.size());
    return t;
  }

  Decoded decode(const ImageEmbedding& embedding, std::span<const PromptPoint> prompts) override {
    const ResizeLongestSide geometry(embedding.image_width, embedding.image_height);
    const int n = static_cast<int>(prompts.size()) + 1;

    // Point prompts plus the (0, 0) padding point with label -1 that the
    // exported decoder expects when no box prompt is given.
    const int coord_dims[3] = {1, n, 2};
    cv::Mat coords(3, coord_dims, CV_32F, cv::Scalar(0.0f));
    const int label_dims[2] = {1, n};
    cv::Mat labels(2, label_dims, CV_32F, cv::Scalar(-1.0f));
    float* c = coords.ptr<float>();
    float* l = labels.ptr<float>();
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      c[2 * i] = geometry.map_x(prompts[i].x);
      c[2 * i + 1] = geometry.map_y(prompts[i].y);
      l[i] = prompts[i].polarity == Polarity::Include ? 1.0f : 0.0f;
    }
    const int mask_dims[4] = {1, 1, kMaskInputSide, kMaskInputSide};
    cv::Mat mask_input(4, mask_dims, CV_32F, cv::Scalar(0.0f));
    const int one[1] = {1};
    cv::Mat has_mask(1, one, CV_32F, cv::Scalar(0.0f));
    const int two[1] = {2};
    cv::Mat orig_size(1, two, CV_32F);
    orig_size.ptr<float>()[0] = static_cast<float>(embedding.image_height);
    orig_size.ptr<float>()[1] = static_cast<float>(embedding.image_width);

    std::vector<cv::Mat> outputs;
    try {
      std::lock_guard lock(decoder_mu_);
      decoder_.setInput(tensor_to_mat(embedding.tensor), "image_embeddings");
      // Graphs that do not consume a prompt input drop it on export.
      set_optional_input(coords, "point_coords");
      set_optional_input(labels, "point_labels");
      set_optional_input(mask_input, "mask_input");
      set_optional_input(has_mask, "has_mask_input");
      set_optional_input(orig_size, "orig_im_size");
      decoder_.forward(outputs, std::vector<cv::String>{"masks", "iou_predictions"});
      for (auto& o : outputs) o = o.clone();
    } catch (const cv::Exception& e) {
      throw Error(Errc::RuntimeFailure, std::string("decoder failed: ") + e.what());
    }
    return postprocess(outputs.at(0), outputs.at(1), geometry);
  }

 private:
  void set_optional_input(const cv::Mat& value, const char* name) {
    try {
      decoder_.setInput(value, name);
    } catch (const cv::Exception& e) {
      if (e.code != cv::Error::StsObjectNotFound) throw;
    }
  }

  static Decoded postprocess(const cv::Mat& masks, const cv::Mat& scores,
                             const ResizeLongestSide& geometry) {
    if (masks.dims != 4 || masks.size[0] < 1 || masks.size[1] < 1) {
      throw Error(Errc::RuntimeFailure, "decoder masks output must be 1xKxHxW");
    }
    const int candidates = masks.size[1];
    const int mh = masks.size[2];
    const int mw = masks.size[3];
    if (static_cast<int>(scores.total()) < candidates) {
      throw Error(Errc::RuntimeFailure, "decoder returned fewer scores than masks");
    }

    // Single mask per item: highest score wins, ties go to the lowest index.
    const float* score = scores.ptr<float>();
    int best = 0;
    for (int k = 1; k < candidates; ++k) {
      if (score[k] > score[best]) best = k;
    }

    const std::size_t plane = static_cast<std::size_t>(mh) * mw;
    cv::Mat logits(mh, mw, CV_32F, const_cast<float*>(masks.ptr<float>()) + best * plane);
    if (mw != geometry.width || mh != geometry.height) {
      // Low-resolution logits live in the padded encoder frame.
      cv::Mat upscaled;
      cv::resize(logits, upscaled, cv::Size(kEncoderSide, kEncoderSide), 0, 0, cv::INTER_LINEAR);
      cv::Mat cropped = upscaled(cv::Rect(0, 0, geometry.resized_width, geometry.resized_height));
      cv::resize(cropped, logits, cv::Size(geometry.width, geometry.height), 0, 0, cv::INTER_LINEAR);
    }

    Decoded out;
    out.mask = MaskBitmap(geometry.width, geometry.height);
    for (int y = 0; y < geometry.height; ++y) {
      const float* row = logits.ptr<float>(y);
      for (int x = 0; x < geometry.width; ++x) {
        if (row[x] > 0.0f) out.mask.set(x, y, true);
      }
    }
    out.score = static_cast<double>(score[best]);
    return out;
  }

  std::mutex encoder_mu_;
  std::mutex decoder_mu_;
  cv::dnn::Net encoder_;
  cv::dnn::Net decoder_;
};

cv::dnn::Net read_model(const std::filesystem::path& path, const char* role) {
  std::error_code ec;
  if (path.empty() || !std::filesystem::is_regular_file(path, ec)) {
    throw Error(Errc::MissingModel, std::string(role) + " model not found: " + path.string());
  }
  try {
    cv::dnn::Net net = cv::dnn::readNetFromONNX(path.string());
    if (net.empty()) throw Error(Errc::CorruptModel, std::string(role) + " model is empty: " + path.string());
    return net;
  } catch (const cv::Exception& e) {
    throw Error(Errc::CorruptModel,
                std::string(role) + " model rejected (" + path.string() + "): " + e.what());
  }
}

}  // namespace

std::shared_ptr<Backend> load_onnx_sam_backend(const BackendId& id, const BackendOptions& options) {
  cv::dnn::Net encoder = read_model(id.model->encoder, "encoder");
  cv::dnn::Net decoder = read_model(id.model->decoder, "decoder");
  return std::make_shared<OnnxSamBackend>(id, options, std::move(encoder), std::move(decoder));
}

}  // namespace foodanno::detail
