// foodanno: evaluation harness, annotation server and synthetic data generator.

#include <csignal>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "foodanno/backend.hpp"
#include "foodanno/error.hpp"
#include "foodanno/eval.hpp"
#include "foodanno/project.hpp"
#include "foodanno/service.hpp"
#include "foodanno/synthetic.hpp"

namespace {

using namespace foodanno;

// "1..5" or "3"
bool parse_click_range(const std::string& text, int& lo, int& hi) {
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      lo = hi = std::stoi(text, &used);
      return used == text.size();
    }
    const std::string a = text.substr(0, dots);
    const std::string b = text.substr(dots + 2);
    lo = std::stoi(a, &used);
    if (used != a.size()) return false;
    hi = std::stoi(b, &used);
    return used == b.size();
  } catch (const std::exception&) {
    return false;
  }
}

struct EvalArgs {
  std::string backend = "mealsam";
  std::string encoder;
  std::string decoder;
  std::string images;
  std::string masks;
  std::string clicks = "1..5";
  int runs = 0;
  std::vector<std::uint64_t> seeds;
  double threshold = 0.5;
  std::string out;
  std::string format = "json";
  int latency_reps = 0;
  int jobs = 1;
  int tolerance = 12;
};

int run_eval_command(const EvalArgs& args) {
  const auto kind = parse_backend_kind(args.backend);
  if (!kind) throw Error(Errc::InvalidConfig, "unknown backend '" + args.backend + "'");

  EvalConfig cfg;
  if (!parse_click_range(args.clicks, cfg.clicks_min, cfg.clicks_max)) {
    throw Error(Errc::InvalidConfig, "--clicks expects N or MIN..MAX, got '" + args.clicks + "'");
  }
  if (!args.seeds.empty()) {
    if (args.runs != 0 && args.runs != static_cast<int>(args.seeds.size())) {
      throw Error(Errc::InvalidConfig, "--runs must equal the number of --seeds");
    }
    cfg.seeds = args.seeds;
  } else if (args.runs != 0) {
    if (args.runs < 1) throw Error(Errc::InvalidConfig, "--runs must be at least 1");
    cfg.seeds.clear();
    for (int r = 1; r <= args.runs; ++r) cfg.seeds.push_back(static_cast<std::uint64_t>(r));
  }
  cfg.iou_threshold = args.threshold;
  cfg.images_dir = args.images;
  cfg.masks_dir = args.masks;
  cfg.latency_reps = args.latency_reps;
  cfg.jobs = args.jobs;
  validate_config(cfg);

  BackendId id{*kind, std::nullopt};
  if (is_model_backed(*kind)) id.model = ModelFiles{args.encoder, args.decoder};
  BackendOptions options;
  options.region_grow_tolerance = args.tolerance;
  const auto backend = load_backend(id, options);

  const EvalReport report = run_eval(cfg, *backend);
  const std::string machine = emit_report(report, ReportFormat::MachineReadable);
  const std::string table = emit_report(report, ReportFormat::Table);
  if (!args.out.empty()) {
    std::ofstream out(args.out, std::ios::binary | std::ios::trunc);
    out << (args.format == "table" ? table : machine);
    if (!out) throw Error(Errc::IoFailure, "cannot write " + args.out);
    std::cout << table;
  } else {
    std::cout << (args.format == "table" ? table : machine);
  }
  return 0;
}

AnnotationService* g_service = nullptr;

void handle_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Promptable food image annotation: evaluation harness and annotation server"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "click-count sweep of IoU over a labeled dataset");
  eval->add_option("--backend", eval_args.backend, "mealsam | sam_vit_b | sam_vit_l | sam_vit_h | region_grow")
      ->capture_default_str();
  eval->add_option("--encoder", eval_args.encoder, "image encoder model (ONNX)");
  eval->add_option("--decoder", eval_args.decoder, "mask decoder model (ONNX)");
  eval->add_option("--images", eval_args.images, "directory of <name>.png|jpg images")->required();
  eval->add_option("--masks", eval_args.masks, "directory of <name>.png class-index rasters")->required();
  eval->add_option("--clicks", eval_args.clicks, "click counts, N or MIN..MAX")->capture_default_str();
  eval->add_option("--runs", eval_args.runs, "number of seeded runs (default 3)");
  eval->add_option("--seeds", eval_args.seeds, "one seed per run (default 1,2,3)")->delimiter(',');
  eval->add_option("--threshold", eval_args.threshold, "IoU success threshold")->capture_default_str();
  eval->add_option("--out", eval_args.out, "report file (stdout when omitted)");
  eval->add_option("--format", eval_args.format, "json | table")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  eval->add_option("--latency-reps", eval_args.latency_reps, "decode repetitions per mask for latency (0 = off)")
      ->capture_default_str();
  eval->add_option("--jobs", eval_args.jobs, "worker threads")->capture_default_str();
  eval->add_option("--tolerance", eval_args.tolerance, "region_grow per-channel tolerance")->capture_default_str();

  ServiceConfig service_cfg;
  std::string manifest;
  std::string categories;
  std::string static_dir;
  std::string output_root = ".";
  double max_upload_mib = 32.0;
  double ttl_minutes = 60.0;
  int cache_capacity = 8;
  auto* serve = app.add_subcommand("serve", "run the annotation HTTP service");
  serve->add_option("--bind", service_cfg.bind_address, "bind address")->envname("FOODANNO_BIND")->capture_default_str();
  serve->add_option("--port", service_cfg.port, "port")->envname("FOODANNO_PORT")->capture_default_str();
  serve->add_option("--models", manifest, "JSON manifest of encoder/decoder files per backend")
      ->envname("FOODANNO_MODELS");
  serve->add_option("--output-root", output_root, "projects may only be saved below this directory")
      ->envname("FOODANNO_OUTPUT_ROOT")
      ->capture_default_str();
  serve->add_option("--categories", categories, "default category file")->envname("FOODANNO_CATEGORIES");
  serve->add_option("--max-upload-mib", max_upload_mib, "maximum request size")
      ->envname("FOODANNO_MAX_UPLOAD_MIB")
      ->capture_default_str();
  serve->add_option("--session-ttl-min", ttl_minutes, "idle minutes before a session is evicted")
      ->envname("FOODANNO_SESSION_TTL_MIN")
      ->capture_default_str();
  serve->add_option("--cache-capacity", cache_capacity, "embeddings kept per backend")->capture_default_str();
  serve->add_option("--static-dir", static_dir, "serve a built web UI from this directory");

  std::string synth_out;
  int synth_count = 20;
  std::uint64_t synth_seed = 7;
  auto* synth = app.add_subcommand("synth", "write a synthetic blob dataset (images/ and masks/)");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--count", synth_count, "number of images")->capture_default_str();
  synth->add_option("--seed", synth_seed, "generator seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval->parsed()) return run_eval_command(eval_args);

    if (serve->parsed()) {
      if (!manifest.empty()) service_cfg.models = load_model_manifest(manifest);
      if (!categories.empty()) service_cfg.default_categories = load_category_file(categories);
      if (!static_dir.empty()) service_cfg.static_dir = static_dir;
      service_cfg.output_root = output_root;
      service_cfg.max_upload_bytes = static_cast<std::size_t>(max_upload_mib * 1024 * 1024);
      service_cfg.session_ttl = std::chrono::seconds(static_cast<long long>(ttl_minutes * 60));
      service_cfg.backend_options.cache_capacity = static_cast<std::size_t>(std::max(0, cache_capacity));
      AnnotationService service(service_cfg);
      g_service = &service;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cerr << "foodanno " << kVersion << " listening on " << service_cfg.bind_address << ":"
                << service_cfg.port << "\n";
      const bool ok = service.run();
      g_service = nullptr;
      return ok ? 0 : 1;
    }

    if (synth->parsed()) {
      const auto images = write_synthetic_dataset(synth_out, synth_count, synth_seed);
      std::size_t masks = 0;
      for (const auto& img : images) masks += img.blobs.size();
      std::cout << "wrote " << images.size() << " images with " << masks << " masks to " << synth_out << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
