#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "foodanno/error.hpp"
#include "foodanno/project.hpp"

namespace {

using foodanno::BackendKind;
using foodanno::Errc;
using foodanno::Polarity;
using foodanno::ProjectFile;
using foodanno::RgbImage;

template <class F>
Errc error_of(F&& f) {
  try {
    f();
  } catch (const foodanno::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::InvalidConfig;
}

std::shared_ptr<foodanno::Backend> region_grow() {
  return foodanno::load_backend({BackendKind::RegionGrow, std::nullopt});
}

TEST(CategoryFileTest, LineOrderIdsSkippingBlanks) {
  const auto reg = foodanno::parse_category_text("rice\n\n  chicken breast \r\nbroccoli");
  ASSERT_EQ(reg.size(), 3u);
  EXPECT_EQ(reg.at(1).name, "chicken breast");
  EXPECT_EQ(reg.at(2).id, 2);
  EXPECT_EQ(reg.at(2).source, foodanno::CategorySource::File);
  EXPECT_EQ(reg.at(2).color, foodanno::category_color(2));
}

TEST(CategoryFileTest, EmptyFileIsEmptyRegistry) {
  fixtures::TempDir dir;
  fixtures::write_file(dir / "c.txt", "");
  EXPECT_EQ(foodanno::load_category_file(dir / "c.txt").size(), 0u);
}

TEST(CategoryFileTest, HundredThreeLines) {
  std::string text;
  for (int i = 0; i < 103; ++i) text += "class " + std::to_string(i) + "\n";
  const auto reg = foodanno::parse_category_text(text);
  EXPECT_EQ(reg.size(), 103u);
  EXPECT_EQ(reg.at(102).name, "class 102");
}

TEST(CategoryFileTest, Errors) {
  EXPECT_EQ(error_of([] { foodanno::parse_category_text("rice\nRice"); }), Errc::DuplicateCategory);
  EXPECT_EQ(error_of([] { foodanno::load_category_file("/nonexistent/cats.txt"); }), Errc::MissingFile);
}

TEST(ProjectSerializeTest, StableBytesAndSortedKeys) {
  const auto s = fixtures::random_session(4, region_grow());
  const ProjectFile p = foodanno::make_project_file(s);
  const std::string a = foodanno::serialize_project(p);
  EXPECT_EQ(a, foodanno::serialize_project(foodanno::parse_project(a)));
  const auto doc = nlohmann::json::parse(a);
  std::vector<std::string> keys;
  for (auto it = doc.begin(); it != doc.end(); ++it) keys.push_back(it.key());
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_EQ(doc["schema_version"], 1);
  EXPECT_EQ(doc["backend"], "region_grow");
}

TEST(ProjectSerializeTest, QuantityShape) {
  ProjectFile p;
  p.image_filename = "x.png";
  p.image_digest = std::string(64, 'a');
  p.categories.push_back({0, "rice", foodanno::category_color(0), foodanno::CategorySource::File});
  p.items.push_back({0, 0, foodanno::Quantity{150, foodanno::QuantityUnit::Gram}, {1, 1, {0, 1}}});
  p.items.push_back({1, 0, std::nullopt, {1, 1, {0, 1}}});
  p.next_item_id = 2;
  const auto doc = nlohmann::json::parse(foodanno::serialize_project(p));
  EXPECT_EQ(doc["items"][0]["quantity"]["unit"], "g");
  EXPECT_EQ(doc["items"][0]["quantity"]["value"], 150.0);
  EXPECT_TRUE(doc["items"][1]["quantity"].is_null());
  EXPECT_EQ(foodanno::parse_project(doc.dump()), p);
}

TEST(ProjectParseTest, RejectsBadDocuments) {
  const auto s = fixtures::random_session(8, region_grow());
  auto doc = nlohmann::json::parse(foodanno::serialize_project(foodanno::make_project_file(s)));

  EXPECT_EQ(error_of([] { foodanno::parse_project("{not json"); }), Errc::MalformedDocument);
  EXPECT_EQ(error_of([] { foodanno::parse_project("[]"); }), Errc::MalformedDocument);

  auto future = doc;
  future["schema_version"] = 2;
  EXPECT_EQ(error_of([&] { foodanno::parse_project(future.dump()); }), Errc::SchemaVersionUnsupported);

  if (!doc["items"].empty()) {
    auto bad_cat = doc;
    bad_cat["items"][0]["category_id"] = 999;
    EXPECT_EQ(error_of([&] { foodanno::parse_project(bad_cat.dump()); }), Errc::UnknownCategory);
  }

  auto missing = doc;
  missing.erase("image_digest");
  EXPECT_EQ(error_of([&] { foodanno::parse_project(missing.dump()); }), Errc::MalformedDocument);
}

TEST(ProjectSaveTest, RoundTripAndFiles) {
  fixtures::TempDir dir;
  const auto s = fixtures::random_session(15, region_grow());
  const auto paths = foodanno::save_project(s, dir / "out");
  EXPECT_TRUE(std::filesystem::exists(paths.project));
  EXPECT_TRUE(std::filesystem::exists(paths.image));
  EXPECT_TRUE(std::filesystem::exists(paths.overlay));
  EXPECT_EQ(foodanno::read_image_file(paths.overlay), s.composite_overlay(false));

  auto loaded = foodanno::load_project(dir / "out");
  EXPECT_EQ(loaded.image, s.image());
  const auto restored = foodanno::restore_session(std::move(loaded), region_grow());
  EXPECT_EQ(restored.items(), s.items());
  EXPECT_EQ(restored.registry(), s.registry());
  EXPECT_EQ(restored.next_item_id(), s.next_item_id());
  EXPECT_EQ(restored.source_filename(), s.source_filename());
  EXPECT_TRUE(restored.pending_points().empty());
  EXPECT_FALSE(restored.pending_mask());
  EXPECT_GE(restored.annotation_seconds(), 0.0);
}

TEST(ProjectSaveTest, FourItemOverlayHasFourBlendedRegions) {
  RgbImage img(40, 10, {255, 255, 255});
  foodanno::CategoryRegistry reg;
  for (const char* n : {"rice", "egg", "bean", "tomato"}) reg.add(n, foodanno::CategorySource::File);
  foodanno::Session s(img, "plate.png", region_grow(), reg);
  for (int k = 0; k < 4; ++k) {
    s.add_point({k * 10 + 5, 5, Polarity::Include});
    s.semi_segment();
    // the white image floods entirely; carve each item down to a small patch
    s.brush_stroke(std::vector<foodanno::PixelCoord>{{20, 5}}, 60, foodanno::BrushMode::Erase);
    s.brush_stroke(std::vector<foodanno::PixelCoord>{{k * 10 + 3, 3}, {k * 10 + 6, 6}}, 2, foodanno::BrushMode::Add);
    s.validate_item(k, std::nullopt);
  }
  fixtures::TempDir dir;
  const auto paths = foodanno::save_project(s, dir.path());
  const RgbImage overlay = foodanno::read_image_file(paths.overlay);
  for (int k = 0; k < 4; ++k) {
    const auto c = foodanno::category_color(k);
    EXPECT_EQ(overlay.at(k * 10 + 4, 4),
              (foodanno::Rgb{foodanno::blend_half(255, c.r), foodanno::blend_half(255, c.g),
                             foodanno::blend_half(255, c.b)}));
  }
  EXPECT_EQ(overlay.at(39, 0), (foodanno::Rgb{255, 255, 255}));
}

TEST(ProjectLoadTest, EditedImageIsDigestMismatch) {
  fixtures::TempDir dir;
  const auto s = fixtures::random_session(23, region_grow());
  foodanno::save_project(s, dir.path());
  RgbImage edited = s.image();
  edited.pixels[0] ^= 1;
  foodanno::write_png(edited, dir / "image.png");
  EXPECT_EQ(error_of([&] { foodanno::load_project(dir.path()); }), Errc::DigestMismatch);
}

TEST(ProjectLoadTest, MissingDocumentIsIoFailure) {
  fixtures::TempDir dir;
  EXPECT_EQ(error_of([&] { foodanno::load_project(dir.path()); }), Errc::IoFailure);
}

TEST(ModelManifestTest, RelativePathsResolveAgainstManifest) {
  fixtures::TempDir dir;
  fixtures::write_file(dir / "models.json",
                       R"({"mealsam": {"encoder": "enc.onnx", "decoder": "/abs/dec.onnx"}})");
  const auto m = foodanno::load_model_manifest(dir / "models.json");
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m.at(BackendKind::MealSam).encoder, dir / "enc.onnx");
  EXPECT_EQ(m.at(BackendKind::MealSam).decoder, "/abs/dec.onnx");

  fixtures::write_file(dir / "bad.json", R"({"sam_vit_z": {"encoder": "a", "decoder": "b"}})");
  EXPECT_EQ(error_of([&] { foodanno::load_model_manifest(dir / "bad.json"); }), Errc::InvalidConfig);
}

}  // namespace
