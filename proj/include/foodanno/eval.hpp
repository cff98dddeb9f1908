#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "foodanno/backend.hpp"
#include "foodanno/mask.hpp"

namespace foodanno {

// Up to n distinct foreground pixels, uniformly without replacement: a
// forward Fisher-Yates shuffle of the row-major foreground list driven by
// std::mt19937_64(seed), stopped after n swaps. The result for n is a prefix
// of the result for n + 1. Throws EmptyGroundTruth.
std::vector<PromptPoint> sample_points(const MaskBitmap& ground_truth, int n, std::uint64_t seed);

// Unbiased draw from [0, bound) by rejection; bound > 0.
std::uint64_t uniform_below(std::uint64_t bound, std::mt19937_64& gen);

// Per-mask sampling seed, a pure function of the run seed and mask identity,
// so every backend sees the same clicks.
std::uint64_t mask_seed(std::uint64_t run_seed, std::string_view image_name, int class_id);

// |a & b| / |a | b|; 1.0 when both are empty. Throws DimensionMismatch.
double iou(const MaskBitmap& a, const MaskBitmap& b);

struct EvalConfig {
  int clicks_min = 1;
  int clicks_max = 5;
  std::vector<std::uint64_t> seeds{1, 2, 3};  // one per run
  double iou_threshold = 0.5;
  std::filesystem::path images_dir;
  std::filesystem::path masks_dir;
  int latency_reps = 0;  // 0 disables the latency section
  int jobs = 1;
};

// Throws InvalidConfig.
void validate_config(const EvalConfig& cfg);

struct RunClickStats {
  int run = 0;
  std::uint64_t seed = 0;
  int clicks = 0;
  double mean_iou = 0.0;
  double success_rate = 0.0;
  std::uint64_t mask_count = 0;
  std::uint64_t errors = 0;

  friend bool operator==(const RunClickStats&, const RunClickStats&) = default;
};

struct ClickSummary {
  int clicks = 0;
  double mean_iou = 0.0;      // mean over runs
  double success_rate = 0.0;  // mean over runs

  friend bool operator==(const ClickSummary&, const ClickSummary&) = default;
};

struct LatencySummary {
  int repetitions = 0;
  std::uint64_t samples = 0;
  double decode_mean_ms = 0.0;
  double decode_median_ms = 0.0;
  double embed_mean_ms = 0.0;

  friend bool operator==(const LatencySummary&, const LatencySummary&) = default;
};

struct EvalProvenance {
  std::string backend;
  int clicks_min = 0;
  int clicks_max = 0;
  std::vector<std::uint64_t> seeds;
  double iou_threshold = 0.0;
  std::string sampler;
  std::string dataset_digest;
  std::uint64_t image_count = 0;
  std::uint64_t mask_count = 0;

  friend bool operator==(const EvalProvenance&, const EvalProvenance&) = default;
};

struct EvalReport {
  EvalProvenance provenance;
  std::vector<RunClickStats> per_run;     // run-major, then clicks ascending
  std::vector<ClickSummary> per_click;    // clicks ascending
  std::optional<LatencySummary> latency;  // wall-clock; only when requested

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// For each image, mask and run: sample clicks_max points once, then predict
// with the first k points for every k. A failed prediction scores IoU 0 and
// is tallied in `errors`. Without latency the report is a pure function of
// (config, dataset, backend).
EvalReport run_eval(const EvalConfig& cfg, Backend& backend);

struct LatencyMeasurement {
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double embed_ms = 0.0;  // one embedding, measured separately
  std::vector<double> samples_ms;
};

// Embeds first, then times `repetitions` decode calls on the warm embedding.
LatencyMeasurement measure_latency(Backend& backend, const RgbImage& image,
                                   std::span<const PromptPoint> prompts, int repetitions);

double median(std::vector<double> values);

enum class ReportFormat { Table, MachineReadable };

std::string emit_report(const EvalReport& report, ReportFormat format);
// Inverse of the MachineReadable form. Throws MalformedDocument.
EvalReport parse_report(std::string_view text);

}  // namespace foodanno
