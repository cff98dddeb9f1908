#include "foodanno/service.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "foodanno/project.hpp"
#include "foodanno/rle.hpp"
#include "foodanno/session.hpp"

namespace foodanno {

using nlohmann::json;

int http_status_for(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownItem:
    case Errc::MissingFile:
      return 404;
    case Errc::UnsupportedExcludePoint:
    case Errc::NothingToUndo:
    case Errc::NoPendingMask:
    case Errc::DuplicateCategory:
    case Errc::DigestMismatch:
      return 409;
    case Errc::MissingModel:
    case Errc::OversizeImage:
    case Errc::EmptyPrompt:
    case Errc::InvalidImage:
    case Errc::OutOfBounds:
    case Errc::EmptyMask:
    case Errc::InvalidBrush:
    case Errc::UnknownCategory:
    case Errc::InvalidQuantity:
    case Errc::EmptyName:
    case Errc::LengthMismatch:
    case Errc::MalformedRuns:
    case Errc::SchemaVersionUnsupported:
    case Errc::MalformedDocument:
    case Errc::MissingMaskForImage:
    case Errc::UnreadableRaster:
    case Errc::EmptyGroundTruth:
    case Errc::DimensionMismatch:
    case Errc::InvalidConfig:
      return 422;
    case Errc::CorruptModel:
    case Errc::RuntimeFailure:
    case Errc::IoFailure:
      return 500;
  }
  return 500;
}

ApiError to_api_error(const Error& error) {
  return {std::string(error_code_name(error.code())), error.what(), http_status_for(error.code())};
}

namespace {

// Failures that exist only at the HTTP layer.
ApiError bad_request(std::string message) { return {"bad_request", std::move(message), 400}; }
ApiError unknown_session(const std::string& id) { return {"unknown_session", "no session " + id, 404}; }
ApiError session_expired(const std::string& id) {
  return {"session_expired", "session " + id + " was evicted after being idle; upload the image again", 410};
}

struct ApiFailure {
  ApiError error;
};

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const ApiError& e) {
  send_json(res, {{"error", {{"code", e.code}, {"message", e.message}}}}, e.http_status);
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw ApiFailure{bad_request("request body must be a JSON object")};
    return j;
  } catch (const json::exception& e) {
    throw ApiFailure{bad_request(std::string("invalid JSON body: ") + e.what())};
  }
}

template <typename T>
T field(const json& body, const char* key) {
  try {
    return body.at(key).get<T>();
  } catch (const json::exception&) {
    throw ApiFailure{bad_request(std::string("missing or invalid field '") + key + "'")};
  }
}

json rle_json(const MaskBitmap& mask) {
  const RleMask rle = rle_encode(mask);
  return {{"width", rle.width}, {"height", rle.height}, {"runs", rle.runs}};
}

json points_json(const std::vector<PromptPoint>& points) {
  json out = json::array();
  for (const PromptPoint& p : points) {
    out.push_back({p.x, p.y, p.polarity == Polarity::Include ? "include" : "exclude"});
  }
  return out;
}

json category_json(const Category& c) {
  return {{"id", c.id},
          {"name", c.name},
          {"color", {c.color.r, c.color.g, c.color.b}},
          {"source", category_source_name(c.source)}};
}

json categories_json(const CategoryRegistry& registry) {
  json out = json::array();
  for (const Category& c : registry.entries()) out.push_back(category_json(c));
  return out;
}

json quantity_json(const std::optional<Quantity>& q) {
  if (!q) return nullptr;
  return {{"value", q->value}, {"unit", quantity_unit_name(q->unit)}};
}

json item_json(const AnnotationItem& item, const CategoryRegistry& registry) {
  return {{"item_id", item.item_id},
          {"category_id", item.category_id},
          {"category_name", registry.at(item.category_id).name},
          {"quantity", quantity_json(item.quantity)},
          {"mask", rle_json(item.mask)}};
}

json pending_json(const Session& s) {
  return {{"points", points_json(s.pending_points())},
          {"pending_mask", s.pending_mask() ? rle_json(*s.pending_mask()) : json(nullptr)},
          {"undo_depth", s.undo_depth()}};
}

std::optional<Quantity> parse_quantity(const json& body) {
  const auto it = body.find("quantity");
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_object() || !it->contains("value")) {
    throw ApiFailure{bad_request("quantity must be {value, unit}")};
  }
  const json& v = it->at("value");
  if (!v.is_number()) throw Error(Errc::InvalidQuantity, "quantity value must be a number");
  const std::string unit_name = it->value("unit", "g");
  const auto unit = parse_quantity_unit(unit_name);
  if (!unit) throw Error(Errc::InvalidQuantity, "quantity unit must be \"g\" or \"ml\"");
  return Quantity{v.get<double>(), *unit};
}

bool is_within(const std::filesystem::path& root, const std::filesystem::path& target) {
  auto r = root.begin();
  auto t = target.begin();
  for (; r != root.end(); ++r, ++t) {
    if (r->empty()) continue;  // trailing separator
    if (t == target.end() || *r != *t) return false;
  }
  return true;
}

}  // namespace

struct AnnotationService::Impl {
  struct Slot {
    std::mutex mu;
    Session session;
    bool fallback_backend = false;
    std::chrono::steady_clock::time_point last_used;

    Slot(Session s, bool fallback)
        : session(std::move(s)), fallback_backend(fallback), last_used(std::chrono::steady_clock::now()) {}
  };

  ServiceConfig config;
  BackendPool backends;
  httplib::Server server;
  std::thread thread;
  std::filesystem::path output_root;

  mutable std::mutex sessions_mu;
  std::map<std::string, std::shared_ptr<Slot>> sessions;
  std::set<std::string> evicted;

  explicit Impl(ServiceConfig cfg)
      : config(std::move(cfg)), backends(config.models, config.backend_options) {
    std::error_code ec;
    std::filesystem::create_directories(config.output_root, ec);
    output_root = std::filesystem::weakly_canonical(std::filesystem::absolute(config.output_root));
    routes();
  }

  void evict_idle_locked() {
    const auto now = std::chrono::steady_clock::now();
    for (auto it = sessions.begin(); it != sessions.end();) {
      if (now - it->second->last_used > config.session_ttl) {
        evicted.insert(it->first);
        it = sessions.erase(it);
      } else {
        ++it;
      }
    }
  }

  std::shared_ptr<Slot> find(const std::string& id) {
    std::lock_guard lock(sessions_mu);
    evict_idle_locked();
    const auto it = sessions.find(id);
    if (it == sessions.end()) {
      if (evicted.count(id) > 0) throw ApiFailure{session_expired(id)};
      throw ApiFailure{unknown_session(id)};
    }
    return it->second;
  }

  // Runs `fn` with the session locked; requests on one session are serialized.
  template <typename Fn>
  auto with_session(const httplib::Request& req, Fn&& fn) {
    const std::shared_ptr<Slot> slot = find(req.matches[1]);
    std::lock_guard lock(slot->mu);
    slot->last_used = std::chrono::steady_clock::now();
    return fn(*slot);
  }

  template <typename Fn>
  httplib::Server::Handler wrap(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const ApiFailure& f) {
        send_error(res, f.error);
      } catch (const Error& e) {
        send_error(res, to_api_error(e));
      } catch (const std::exception& e) {
        send_error(res, {"internal", e.what(), 500});
      }
    };
  }

  json session_summary(const Slot& slot) const {
    const Session& s = slot.session;
    return {{"session_id", s.id()},
            {"width", s.image().width},
            {"height", s.image().height},
            {"backend", backend_kind_name(s.backend_kind())},
            {"supports_background_points", s.backend().supports_background_points()},
            {"fallback_backend", slot.fallback_backend},
            {"categories", categories_json(s.registry())}};
  }

  json session_snapshot(const Slot& slot) const {
    json out = session_summary(slot);
    const Session& s = slot.session;
    const json pending = pending_json(s);
    out["points"] = pending["points"];
    out["pending_mask"] = pending["pending_mask"];
    out["undo_depth"] = pending["undo_depth"];
    json items = json::array();
    for (const AnnotationItem& item : s.items()) items.push_back(item_json(item, s.registry()));
    out["items"] = std::move(items);
    out["annotation_seconds"] = s.annotation_seconds();
    return out;
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    if (!req.is_multipart_form_data() || !req.has_file("image")) {
      throw ApiFailure{bad_request("expected multipart form data with an 'image' part")};
    }
    const auto& image_part = req.get_file_value("image");
    const auto& bytes = image_part.content;
    RgbImage image = decode_image(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));

    CategoryRegistry registry = config.default_categories;
    if (req.has_file("categories")) {
      try {
        registry = parse_category_text(req.get_file_value("categories").content);
      } catch (const Error& e) {
        throw ApiFailure{{"bad_category_file", e.what(), 422}};
      }
    }

    std::optional<BackendKind> requested;
    if (req.has_file("backend")) {
      const std::string name = trim(req.get_file_value("backend").content);
      if (!name.empty()) {
        requested = parse_backend_kind(name);
        if (!requested) throw ApiFailure{{"unknown_backend", "unknown backend '" + name + "'", 422}};
      }
    }
    bool fallback = false;
    if (!requested) {
      if (backends.configured(BackendKind::MealSam)) {
        requested = BackendKind::MealSam;
      } else {
        requested = BackendKind::RegionGrow;
        fallback = true;
      }
    } else if (!backends.configured(*requested)) {
      throw Error(Errc::MissingModel,
                  std::string(backend_kind_name(*requested)) + " has no model files configured");
    }

    std::string filename = image_part.filename.empty() ? "image.png" : image_part.filename;
    auto slot = std::make_shared<Slot>(
        foodanno::create_session(std::move(image), std::move(filename), std::move(registry), backends, requested),
        fallback);
    json body = session_summary(*slot);
    {
      std::lock_guard lock(sessions_mu);
      evict_idle_locked();
      sessions.emplace(slot->session.id(), slot);
    }
    send_json(res, body, 201);
  }

  std::filesystem::path resolve_output_dir(const std::string& requested) const {
    if (requested.empty()) throw ApiFailure{bad_request("output_dir is required")};
    std::filesystem::path target(requested);
    if (target.is_relative()) target = output_root / target;
    target = std::filesystem::weakly_canonical(target);
    if (!is_within(output_root, target)) {
      throw ApiFailure{{"forbidden_path", "output_dir must stay inside the configured output root", 403}};
    }
    return target;
  }

  void routes() {
    server.set_payload_max_length(config.max_upload_bytes);
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      if (res.status == 413) {
        send_error(res, {"payload_too_large", "upload exceeds the configured maximum size", 413});
      } else if (res.status == 404) {
        send_error(res, {"not_found", "no such endpoint", 404});
      } else {
        send_error(res, {"bad_request", "request could not be processed", res.status});
      }
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
      send_error(res, {"internal", "unexpected server failure", 500});
    });
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    // browser preflight for JSON posts from a UI served elsewhere
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });

    const std::string sid = "/sessions/([0-9a-f]+)";

    server.Get("/healthz", wrap([](const auto&, auto& res) {
      send_json(res, {{"status", "ok"}, {"version", kVersion}});
    }));

    server.Get("/backends", wrap([this](const auto&, auto& res) {
      json out = json::array();
      for (const auto& s : backends.status()) {
        json entry = {{"kind", backend_kind_name(s.kind)},
                      {"configured", s.configured},
                      {"loadable", s.loadable},
                      {"loaded", s.loaded},
                      {"supports_background_points", supports_background_points(s.kind)}};
        if (!s.error.empty()) entry["error"] = s.error;
        out.push_back(std::move(entry));
      }
      send_json(res, {{"backends", std::move(out)}});
    }));

    server.Get("/categories", wrap([this](const httplib::Request& req, auto& res) {
      if (req.has_param("session_id")) {
        const auto slot = find(req.get_param_value("session_id"));
        std::lock_guard lock(slot->mu);
        send_json(res, {{"categories", categories_json(slot->session.registry())}});
        return;
      }
      send_json(res, {{"categories", categories_json(config.default_categories)}});
    }));

    server.Post("/sessions", wrap([this](const auto& req, auto& res) { create_session(req, res); }));

    server.Get(sid, wrap([this](const httplib::Request& req, auto& res) {
      with_session(req, [&](Slot& slot) { send_json(res, session_snapshot(slot)); });
    }));

    server.Delete(sid, wrap([this](const httplib::Request& req, auto& res) {
      const std::string id = req.matches[1];
      std::shared_ptr<Slot> slot = find(id);
      std::lock_guard slot_lock(slot->mu);  // let in-flight requests finish
      std::lock_guard lock(sessions_mu);
      sessions.erase(id);
      send_json(res, {{"deleted", id}});
    }));

    server.Get(sid + "/categories", wrap([this](const httplib::Request& req, auto& res) {
      with_session(req, [&](Slot& slot) {
        send_json(res, {{"categories", categories_json(slot.session.registry())}});
      });
    }));

    server.Post(sid + "/points", wrap([this](const httplib::Request& req, auto& res) {
      const json body = parse_body(req);
      const int x = field<int>(body, "x");
      const int y = field<int>(body, "y");
      const std::string polarity = body.value("polarity", "include");
      if (polarity != "include" && polarity != "exclude") {
        throw ApiFailure{bad_request("polarity must be \"include\" or \"exclude\"")};
      }
      with_session(req, [&](Slot& slot) {
        slot.session.add_point({x, y, polarity == "include" ? Polarity::Include : Polarity::Exclude});
        send_json(res, {{"points", points_json(slot.session.pending_points())}});
      });
    }));

    server.Post(sid + "/undo", wrap([this](const httplib::Request& req, auto& res) {
      with_session(req, [&](Slot& slot) {
        slot.session.undo_last();
        send_json(res, pending_json(slot.session));
      });
    }));

    server.Post(sid + "/clear", wrap([this](const httplib::Request& req, auto& res) {
      with_session(req, [&](Slot& slot) {
        slot.session.clear_points();
        send_json(res, pending_json(slot.session));
      });
    }));

    server.Post(sid + "/segment", wrap([this](const httplib::Request& req, auto& res) {
      with_session(req, [&](Slot& slot) {
        const MaskPrediction p = slot.session.semi_segment();
        send_json(res, {{"mask", rle_json(p.mask)}, {"score", p.score}, {"latency_ms", p.latency_ms}});
      });
    }));

    server.Post(sid + "/brush", wrap([this](const httplib::Request& req, auto& res) {
      const json body = parse_body(req);
      std::vector<PixelCoord> path;
      for (const auto& pt : field<std::vector<std::array<int, 2>>>(body, "path")) {
        path.push_back({pt[0], pt[1]});
      }
      const int radius = field<int>(body, "radius");
      const std::string mode = body.value("mode", "add");
      if (mode != "add" && mode != "erase") throw ApiFailure{bad_request("mode must be \"add\" or \"erase\"")};
      with_session(req, [&](Slot& slot) {
        slot.session.brush_stroke(path, radius, mode == "add" ? BrushMode::Add : BrushMode::Erase);
        send_json(res, {{"mask", rle_json(*slot.session.pending_mask())},
                        {"undo_depth", slot.session.undo_depth()}});
      });
    }));

    server.Post(sid + "/items", wrap([this](const httplib::Request& req, auto& res) {
      const json body = parse_body(req);
      const bool by_id = body.contains("category_id") && !body["category_id"].is_null();
      const bool by_name = body.contains("new_category_name") && !body["new_category_name"].is_null();
      if (by_id == by_name) {
        throw ApiFailure{bad_request("give exactly one of category_id or new_category_name")};
      }
      with_session(req, [&](Slot& slot) {
        const std::optional<Quantity> quantity = parse_quantity(body);
        const AnnotationItem& item =
            by_id ? slot.session.validate_item(field<int>(body, "category_id"), quantity)
                  : slot.session.validate_item_with_new_category(field<std::string>(body, "new_category_name"),
                                                                 quantity);
        send_json(res,
                  {{"item", item_json(item, slot.session.registry())},
                   {"category", category_json(slot.session.registry().at(item.category_id))}},
                  201);
      });
    }));

    server.Delete(sid + "/items/([0-9]+)", wrap([this](const httplib::Request& req, auto& res) {
      const int item_id = std::stoi(req.matches[2]);
      with_session(req, [&](Slot& slot) {
        slot.session.delete_item(item_id);
        json ids = json::array();
        for (const auto& item : slot.session.items()) ids.push_back(item.item_id);
        send_json(res, {{"items", std::move(ids)}});
      });
    }));

    server.Get(sid + "/overlay", wrap([this](const httplib::Request& req, auto& res) {
      const std::string pending = req.has_param("pending") ? req.get_param_value("pending") : "false";
      if (pending != "true" && pending != "false") {
        throw ApiFailure{bad_request("pending must be true or false")};
      }
      with_session(req, [&](Slot& slot) {
        const auto png = encode_png(slot.session.composite_overlay(pending == "true"));
        res.set_content(std::string(png.begin(), png.end()), "image/png");
      });
    }));

    server.Post(sid + "/save", wrap([this](const httplib::Request& req, auto& res) {
      const json body = parse_body(req);
      const std::filesystem::path dir = resolve_output_dir(field<std::string>(body, "output_dir"));
      with_session(req, [&](Slot& slot) {
        const SavedPaths paths = save_project(slot.session, dir);
        send_json(res, {{"paths",
                         {{"project", paths.project.string()},
                          {"image", paths.image.string()},
                          {"overlay", paths.overlay.string()}}},
                        {"total_annotation_seconds", slot.session.annotation_seconds()}});
      });
    }));

    if (config.static_dir) server.set_mount_point("/", config.static_dir->string());
  }
};

AnnotationService::AnnotationService(ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

AnnotationService::~AnnotationService() { stop(); }

int AnnotationService::start() {
  int port = impl_->config.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(impl_->config.bind_address);
  } else if (!impl_->server.bind_to_port(impl_->config.bind_address, port)) {
    port = -1;
  }
  if (port < 0) throw Error(Errc::IoFailure, "cannot bind " + impl_->config.bind_address);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

bool AnnotationService::run() {
  return impl_->server.listen(impl_->config.bind_address, impl_->config.port);
}

void AnnotationService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::size_t AnnotationService::session_count() const {
  std::lock_guard lock(impl_->sessions_mu);
  return impl_->sessions.size();
}

}  // namespace foodanno
