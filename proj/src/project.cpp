#include "foodanno/project.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "foodanno/error.hpp"

namespace foodanno {

using nlohmann::json;

namespace {

std::string read_text(const std::filesystem::path& path, Errc missing) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(missing, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_atomically(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp-" + random_token();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(Errc::IoFailure, "cannot write " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(Errc::IoFailure, "cannot replace " + path.string());
  }
}

json rle_to_json(const RleMask& rle) {
  return {{"width", rle.width}, {"height", rle.height}, {"runs", rle.runs}};
}

RleMask rle_from_json(const json& j) {
  RleMask rle;
  rle.width = j.at("width").get<int>();
  rle.height = j.at("height").get<int>();
  rle.runs = j.at("runs").get<std::vector<std::uint64_t>>();
  return rle;
}

}  // namespace

CategoryRegistry parse_category_text(std::string_view text) {
  CategoryRegistry registry;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    if (trim(line).empty()) continue;
    registry.add(line, CategorySource::File);
  }
  return registry;
}

CategoryRegistry load_category_file(const std::filesystem::path& path) {
  return parse_category_text(read_text(path, Errc::MissingFile));
}

ProjectFile make_project_file(const Session& session) {
  ProjectFile p;
  p.image_filename = session.source_filename();
  p.image_digest = session.image_digest();
  p.backend = session.backend_kind();
  p.categories = session.registry().entries();
  for (const AnnotationItem& item : session.items()) {
    p.items.push_back({item.item_id, item.category_id, item.quantity, rle_encode(item.mask)});
  }
  p.next_item_id = session.next_item_id();
  p.total_annotation_seconds = session.annotation_seconds();
  return p;
}

std::string serialize_project(const ProjectFile& project) {
  json categories = json::array();
  for (const Category& c : project.categories) {
    categories.push_back({{"id", c.id},
                          {"name", c.name},
                          {"color", {c.color.r, c.color.g, c.color.b}},
                          {"source", category_source_name(c.source)}});
  }
  json items = json::array();
  for (const ProjectItem& item : project.items) {
    json j = {{"item_id", item.item_id}, {"category_id", item.category_id}, {"mask", rle_to_json(item.mask)}};
    if (item.quantity) {
      j["quantity"] = {{"value", item.quantity->value}, {"unit", quantity_unit_name(item.quantity->unit)}};
    } else {
      j["quantity"] = nullptr;
    }
    items.push_back(std::move(j));
  }
  const json doc = {{"schema_version", project.schema_version},
                    {"image_filename", project.image_filename},
                    {"image_digest", project.image_digest},
                    {"backend", backend_kind_name(project.backend)},
                    {"categories", std::move(categories)},
                    {"items", std::move(items)},
                    {"next_item_id", project.next_item_id},
                    {"total_annotation_seconds", project.total_annotation_seconds}};
  return doc.dump(2) + "\n";
}

ProjectFile parse_project(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedDocument, std::string("project document is not valid JSON: ") + e.what());
  }

  ProjectFile p;
  try {
    p.schema_version = doc.at("schema_version").get<int>();
    if (p.schema_version != kProjectSchemaVersion) {
      throw Error(Errc::SchemaVersionUnsupported,
                  "unsupported project schema version " + std::to_string(p.schema_version));
    }
    p.image_filename = doc.at("image_filename").get<std::string>();
    p.image_digest = doc.at("image_digest").get<std::string>();
    const auto kind = parse_backend_kind(doc.at("backend").get<std::string>());
    if (!kind) throw Error(Errc::MalformedDocument, "unknown backend kind in project");
    p.backend = *kind;

    for (const json& c : doc.at("categories")) {
      Category cat;
      cat.id = c.at("id").get<int>();
      cat.name = c.at("name").get<std::string>();
      const auto rgb = c.at("color").get<std::array<int, 3>>();
      for (int v : rgb) {
        if (v < 0 || v > 255) throw Error(Errc::MalformedDocument, "category color out of range");
      }
      cat.color = {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                   static_cast<std::uint8_t>(rgb[2])};
      const auto source = parse_category_source(c.at("source").get<std::string>());
      if (!source) throw Error(Errc::MalformedDocument, "unknown category source");
      cat.source = *source;
      if (cat.id != static_cast<int>(p.categories.size())) {
        throw Error(Errc::MalformedDocument, "category ids must be dense and ordered");
      }
      p.categories.push_back(std::move(cat));
    }

    for (const json& j : doc.at("items")) {
      ProjectItem item;
      item.item_id = j.at("item_id").get<int>();
      item.category_id = j.at("category_id").get<int>();
      if (item.category_id < 0 || item.category_id >= static_cast<int>(p.categories.size())) {
        throw Error(Errc::UnknownCategory,
                    "item " + std::to_string(item.item_id) + " references an unknown category");
      }
      const json& q = j.at("quantity");
      if (!q.is_null()) {
        const auto unit = parse_quantity_unit(q.at("unit").get<std::string>());
        if (!unit) throw Error(Errc::MalformedDocument, "unknown quantity unit");
        item.quantity = Quantity{q.at("value").get<double>(), *unit};
      }
      item.mask = rle_from_json(j.at("mask"));
      rle_decode(item.mask);  // validates the runs
      p.items.push_back(std::move(item));
    }
    p.next_item_id = doc.at("next_item_id").get<int>();
    p.total_annotation_seconds = doc.at("total_annotation_seconds").get<double>();
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedDocument, std::string("project document: ") + e.what());
  }
  return p;
}

SavedPaths save_project(const Session& session, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot create " + dir.string() + ": " + ec.message());

  SavedPaths paths{dir / kProjectDocument, dir / kProjectImage, dir / kProjectOverlay};
  const std::string doc = serialize_project(make_project_file(session));
  write_atomically(paths.image, encode_png(session.image()));
  write_atomically(paths.overlay, encode_png(session.composite_overlay(false)));
  write_atomically(paths.project,
                   std::span(reinterpret_cast<const std::uint8_t*>(doc.data()), doc.size()));
  return paths;
}

LoadedProject load_project(const std::filesystem::path& dir) {
  LoadedProject out;
  out.document = parse_project(read_text(dir / kProjectDocument, Errc::IoFailure));
  try {
    out.image = read_image_file(dir / kProjectImage);
  } catch (const Error& e) {
    throw Error(Errc::IoFailure, std::string("project image: ") + e.what());
  }
  if (pixel_digest(out.image) != out.document.image_digest) {
    throw Error(Errc::DigestMismatch, "image pixels changed since the project was saved");
  }
  for (const ProjectItem& item : out.document.items) {
    if (item.mask.width != out.image.width || item.mask.height != out.image.height) {
      throw Error(Errc::DimensionMismatch, "item mask does not match the image size");
    }
  }
  return out;
}

Session restore_session(LoadedProject project, std::shared_ptr<Backend> backend) {
  CategoryRegistry registry;
  for (const Category& c : project.document.categories) {
    registry.add(c.name, c.source);
  }
  if (registry.entries() != project.document.categories) {
    throw Error(Errc::MalformedDocument, "category colors do not match their ids");
  }
  std::vector<AnnotationItem> items;
  for (const ProjectItem& item : project.document.items) {
    items.push_back({item.item_id, rle_decode(item.mask), item.category_id, item.quantity});
  }
  return Session::restore(std::move(project.image), project.document.image_filename,
                          std::move(backend), std::move(registry), std::move(items),
                          project.document.next_item_id, project.document.total_annotation_seconds);
}

ModelManifest load_model_manifest(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path, Errc::MissingFile));
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("model manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(Errc::InvalidConfig, "model manifest must be a JSON object");

  const auto base = path.parent_path();
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  ModelManifest manifest;
  for (const auto& [key, value] : doc.items()) {
    const auto kind = parse_backend_kind(key);
    if (!kind || !is_model_backed(*kind)) {
      throw Error(Errc::InvalidConfig, "model manifest: unknown model backend '" + key + "'");
    }
    try {
      manifest[*kind] = {resolve(value.at("encoder").get<std::string>()),
                         resolve(value.at("decoder").get<std::string>())};
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidConfig, "model manifest entry '" + key + "': " + e.what());
    }
  }
  return manifest;
}

}  // namespace foodanno
