#include "foodanno/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "foodanno/dataset.hpp"
#include "foodanno/error.hpp"

namespace foodanno {

using nlohmann::json;

namespace {

constexpr char kSamplerName[] = "mt19937_64+fisher-yates-prefix";

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct MaskOutcome {
  double iou = 0.0;
  bool failed = false;
};

// outcomes[mask][run][k - clicks_min]
struct ImageResult {
  std::string digest_record;
  std::vector<std::vector<std::vector<MaskOutcome>>> outcomes;
};

ImageResult evaluate_image(const EvalConfig& cfg, Backend& backend, const DatasetEntry& entry) {
  const EvalSample sample = load_eval_sample(entry);
  // The dataset digest covers ground truth as well as pixels.
  std::string gt_bytes;
  for (const GroundTruthMask& m : sample.masks) {
    gt_bytes += std::to_string(m.class_id) + ':' + std::to_string(m.mask.count()) + ';';
  }
  std::vector<std::uint8_t> gt_payload(gt_bytes.begin(), gt_bytes.end());
  for (const GroundTruthMask& m : sample.masks) {
    gt_payload.insert(gt_payload.end(), m.mask.bits().begin(), m.mask.bits().end());
  }

  ImageResult result;
  result.digest_record = sample.name + ' ' + pixel_digest(sample.image) + ' ' + sha256_hex(gt_payload) + '\n';

  const int ks = cfg.clicks_max - cfg.clicks_min + 1;
  std::shared_ptr<const ImageEmbedding> embedding;
  bool embed_failed = false;
  try {
    embedding = backend.embed_image(sample.image);
  } catch (const Error&) {
    embed_failed = true;
  }

  for (const GroundTruthMask& gt : sample.masks) {
    auto& per_run = result.outcomes.emplace_back();
    for (const std::uint64_t run_seed : cfg.seeds) {
      auto& per_k = per_run.emplace_back(static_cast<std::size_t>(ks));
      const auto points = sample_points(gt.mask, cfg.clicks_max, mask_seed(run_seed, sample.name, gt.class_id));
      for (int k = cfg.clicks_min; k <= cfg.clicks_max; ++k) {
        MaskOutcome& out = per_k[static_cast<std::size_t>(k - cfg.clicks_min)];
        if (embed_failed) {
          out.failed = true;
          continue;
        }
        const std::size_t used = std::min<std::size_t>(static_cast<std::size_t>(k), points.size());
        try {
          const MaskPrediction pred =
              backend.predict_mask(*embedding, std::span(points.data(), used));
          out.iou = iou(pred.mask, gt.mask);
        } catch (const Error&) {
          out.failed = true;
        }
      }
    }
  }
  return result;
}

json report_to_json(const EvalReport& r) {
  const EvalProvenance& p = r.provenance;
  json per_run = json::array();
  for (const RunClickStats& s : r.per_run) {
    per_run.push_back({{"run", s.run},
                       {"seed", s.seed},
                       {"clicks", s.clicks},
                       {"mean_iou", s.mean_iou},
                       {"success_rate", s.success_rate},
                       {"mask_count", s.mask_count},
                       {"errors", s.errors}});
  }
  json per_click = json::array();
  for (const ClickSummary& s : r.per_click) {
    per_click.push_back({{"clicks", s.clicks}, {"mean_iou", s.mean_iou}, {"success_rate", s.success_rate}});
  }
  json doc = {{"provenance",
               {{"backend", p.backend},
                {"clicks_min", p.clicks_min},
                {"clicks_max", p.clicks_max},
                {"seeds", p.seeds},
                {"iou_threshold", p.iou_threshold},
                {"sampler", p.sampler},
                {"dataset_digest", p.dataset_digest},
                {"image_count", p.image_count},
                {"mask_count", p.mask_count}}},
              {"per_run", std::move(per_run)},
              {"per_click", std::move(per_click)},
              {"latency", nullptr}};
  if (r.latency) {
    doc["latency"] = {{"repetitions", r.latency->repetitions},
                      {"samples", r.latency->samples},
                      {"decode_mean_ms", r.latency->decode_mean_ms},
                      {"decode_median_ms", r.latency->decode_median_ms},
                      {"embed_mean_ms", r.latency->embed_mean_ms}};
  }
  return doc;
}

}  // namespace

std::uint64_t uniform_below(std::uint64_t bound, std::mt19937_64& gen) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % bound + 1) % bound;
  std::uint64_t r = 0;
  do {
    r = gen();
  } while (r > limit);
  return r % bound;
}

std::vector<PromptPoint> sample_points(const MaskBitmap& ground_truth, int n, std::uint64_t seed) {
  if (n < 1) throw Error(Errc::InvalidConfig, "number of points must be at least 1");
  std::vector<std::uint32_t> foreground;
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    if (ground_truth[i]) foreground.push_back(static_cast<std::uint32_t>(i));
  }
  if (foreground.empty()) throw Error(Errc::EmptyGroundTruth, "ground-truth mask has no foreground");

  std::mt19937_64 gen(seed);
  const std::size_t take = std::min(foreground.size(), static_cast<std::size_t>(n));
  std::vector<PromptPoint> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + uniform_below(foreground.size() - i, gen);
    std::swap(foreground[i], foreground[j]);
    const auto w = static_cast<std::uint32_t>(ground_truth.width());
    out.push_back({static_cast<int>(foreground[i] % w), static_cast<int>(foreground[i] / w), Polarity::Include});
  }
  return out;
}

std::uint64_t mask_seed(std::uint64_t run_seed, std::string_view image_name, int class_id) {
  const std::string key = std::string(image_name) + '#' + std::to_string(class_id);
  return splitmix64(splitmix64(run_seed) ^ fnv1a64(key));
}

double iou(const MaskBitmap& a, const MaskBitmap& b) {
  if (!a.same_shape(b)) {
    throw Error(Errc::DimensionMismatch, "IoU of masks with different sizes");
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  const auto& x = a.bits();
  const auto& y = b.bits();
  for (std::size_t i = 0; i < x.size(); ++i) {
    inter += x[i] & y[i];
    uni += x[i] | y[i];
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

void validate_config(const EvalConfig& cfg) {
  if (cfg.clicks_min < 1 || cfg.clicks_min > cfg.clicks_max) {
    throw Error(Errc::InvalidConfig, "clicks must satisfy 1 <= min <= max");
  }
  if (cfg.seeds.empty()) throw Error(Errc::InvalidConfig, "at least one run (seed) is required");
  if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold < 1.0)) {
    throw Error(Errc::InvalidConfig, "IoU threshold must lie strictly between 0 and 1");
  }
  if (cfg.latency_reps < 0) throw Error(Errc::InvalidConfig, "latency repetitions must be >= 0");
  if (cfg.jobs < 1) throw Error(Errc::InvalidConfig, "jobs must be >= 1");
}

EvalReport run_eval(const EvalConfig& cfg, Backend& backend) {
  validate_config(cfg);
  const std::vector<DatasetEntry> entries = index_eval_dataset(cfg.images_dir, cfg.masks_dir);

  std::vector<ImageResult> results(entries.size());
  std::vector<std::exception_ptr> failures(entries.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      try {
        results[i] = evaluate_image(cfg, backend, entries[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(entries.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  EvalReport report;
  EvalProvenance& p = report.provenance;
  p.backend = backend.name();
  p.clicks_min = cfg.clicks_min;
  p.clicks_max = cfg.clicks_max;
  p.seeds = cfg.seeds;
  p.iou_threshold = cfg.iou_threshold;
  p.sampler = kSamplerName;
  p.image_count = entries.size();
  std::string digest_input;
  for (const ImageResult& r : results) {
    digest_input += r.digest_record;
    p.mask_count += r.outcomes.size();
  }
  p.dataset_digest = sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(digest_input.data()),
                                          digest_input.size()));

  // Sums run in dataset order, so the result does not depend on scheduling.
  const int ks = cfg.clicks_max - cfg.clicks_min + 1;
  for (std::size_t run = 0; run < cfg.seeds.size(); ++run) {
    for (int ki = 0; ki < ks; ++ki) {
      RunClickStats s;
      s.run = static_cast<int>(run);
      s.seed = cfg.seeds[run];
      s.clicks = cfg.clicks_min + ki;
      double iou_sum = 0.0;
      std::uint64_t hits = 0;
      for (const ImageResult& r : results) {
        for (const auto& per_run : r.outcomes) {
          const MaskOutcome& o = per_run[run][static_cast<std::size_t>(ki)];
          iou_sum += o.iou;
          hits += o.iou >= cfg.iou_threshold ? 1 : 0;
          s.errors += o.failed ? 1 : 0;
          ++s.mask_count;
        }
      }
      if (s.mask_count > 0) {
        s.mean_iou = iou_sum / static_cast<double>(s.mask_count);
        s.success_rate = static_cast<double>(hits) / static_cast<double>(s.mask_count);
      }
      report.per_run.push_back(s);
    }
  }
  for (int ki = 0; ki < ks; ++ki) {
    ClickSummary c;
    c.clicks = cfg.clicks_min + ki;
    for (std::size_t run = 0; run < cfg.seeds.size(); ++run) {
      const RunClickStats& s = report.per_run[run * static_cast<std::size_t>(ks) + static_cast<std::size_t>(ki)];
      c.mean_iou += s.mean_iou;
      c.success_rate += s.success_rate;
    }
    c.mean_iou /= static_cast<double>(cfg.seeds.size());
    c.success_rate /= static_cast<double>(cfg.seeds.size());
    report.per_click.push_back(c);
  }

  if (cfg.latency_reps > 0) {
    // Single-threaded so the timings are not skewed by worker contention.
    LatencySummary lat;
    lat.repetitions = cfg.latency_reps;
    std::vector<double> decode_samples;
    double embed_total = 0.0;
    std::uint64_t images_timed = 0;
    for (const DatasetEntry& entry : entries) {
      const EvalSample sample = load_eval_sample(entry);
      bool first = true;
      for (const GroundTruthMask& gt : sample.masks) {
        const auto points = sample_points(gt.mask, cfg.clicks_max,
                                          mask_seed(cfg.seeds.front(), sample.name, gt.class_id));
        try {
          const LatencyMeasurement m = measure_latency(backend, sample.image, points, cfg.latency_reps);
          decode_samples.insert(decode_samples.end(), m.samples_ms.begin(), m.samples_ms.end());
          if (first) {
            embed_total += m.embed_ms;
            ++images_timed;
            first = false;
          }
        } catch (const Error&) {
        }
      }
    }
    lat.samples = decode_samples.size();
    if (!decode_samples.empty()) {
      double sum = 0.0;
      for (double v : decode_samples) sum += v;
      lat.decode_mean_ms = sum / static_cast<double>(decode_samples.size());
      lat.decode_median_ms = median(decode_samples);
    }
    if (images_timed > 0) lat.embed_mean_ms = embed_total / static_cast<double>(images_timed);
    report.latency = lat;
  }
  return report;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
}

LatencyMeasurement measure_latency(Backend& backend, const RgbImage& image,
                                   std::span<const PromptPoint> prompts, int repetitions) {
  if (repetitions < 1) throw Error(Errc::InvalidConfig, "repetitions must be >= 1");
  LatencyMeasurement out;
  const auto start = std::chrono::steady_clock::now();
  const auto embedding = backend.embed_image(image);
  out.embed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  double sum = 0.0;
  for (int i = 0; i < repetitions; ++i) {
    const MaskPrediction p = backend.predict_mask(*embedding, prompts);
    out.samples_ms.push_back(p.latency_ms);
    sum += p.latency_ms;
  }
  out.mean_ms = sum / repetitions;
  out.median_ms = median(out.samples_ms);
  return out;
}

std::string emit_report(const EvalReport& report, ReportFormat format) {
  if (format == ReportFormat::MachineReadable) return report_to_json(report).dump(2) + "\n";

  std::ostringstream out;
  const EvalProvenance& p = report.provenance;
  out << "backend: " << p.backend << "  images: " << p.image_count << "  masks: " << p.mask_count
      << "  runs: " << p.seeds.size() << "  threshold: " << p.iou_threshold << "\n";
  char line[128];
  std::snprintf(line, sizeof line, "%6s  %10s  %12s\n", "clicks", "mean_iou", "success_rate");
  out << line;
  for (const ClickSummary& c : report.per_click) {
    std::snprintf(line, sizeof line, "%6d  %10.4f  %12.4f\n", c.clicks, c.mean_iou, c.success_rate);
    out << line;
  }
  if (report.latency) {
    std::snprintf(line, sizeof line, "decode latency: mean %.3f ms, median %.3f ms (%llu samples)\n",
                  report.latency->decode_mean_ms, report.latency->decode_median_ms,
                  static_cast<unsigned long long>(report.latency->samples));
    out << line;
  }
  return out.str();
}

EvalReport parse_report(std::string_view text) {
  EvalReport r;
  try {
    const json doc = json::parse(text);
    const json& p = doc.at("provenance");
    r.provenance.backend = p.at("backend").get<std::string>();
    r.provenance.clicks_min = p.at("clicks_min").get<int>();
    r.provenance.clicks_max = p.at("clicks_max").get<int>();
    r.provenance.seeds = p.at("seeds").get<std::vector<std::uint64_t>>();
    r.provenance.iou_threshold = p.at("iou_threshold").get<double>();
    r.provenance.sampler = p.at("sampler").get<std::string>();
    r.provenance.dataset_digest = p.at("dataset_digest").get<std::string>();
    r.provenance.image_count = p.at("image_count").get<std::uint64_t>();
    r.provenance.mask_count = p.at("mask_count").get<std::uint64_t>();
    for (const json& s : doc.at("per_run")) {
      r.per_run.push_back({s.at("run").get<int>(), s.at("seed").get<std::uint64_t>(),
                           s.at("clicks").get<int>(), s.at("mean_iou").get<double>(),
                           s.at("success_rate").get<double>(), s.at("mask_count").get<std::uint64_t>(),
                           s.at("errors").get<std::uint64_t>()});
    }
    for (const json& c : doc.at("per_click")) {
      r.per_click.push_back({c.at("clicks").get<int>(), c.at("mean_iou").get<double>(),
                             c.at("success_rate").get<double>()});
    }
    const json& lat = doc.at("latency");
    if (!lat.is_null()) {
      r.latency = LatencySummary{lat.at("repetitions").get<int>(), lat.at("samples").get<std::uint64_t>(),
                                 lat.at("decode_mean_ms").get<double>(),
                                 lat.at("decode_median_ms").get<double>(),
                                 lat.at("embed_mean_ms").get<double>()};
    }
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedDocument, std::string("evaluation report: ") + e.what());
  }
  return r;
}

}  // namespace foodanno
