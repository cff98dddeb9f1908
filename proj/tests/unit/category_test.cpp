#include <gtest/gtest.h>

#include "foodanno/category.hpp"
#include "foodanno/error.hpp"
#include "oracles.hpp"

namespace {

using foodanno::CategoryRegistry;
using foodanno::CategorySource;
using foodanno::Errc;
using foodanno::Rgb;

TEST(CategoryColorTest, FrozenValues) {
  EXPECT_EQ(foodanno::category_color(0), (Rgb{242, 36, 36}));
  EXPECT_EQ(foodanno::category_color(1), (Rgb{36, 96, 242}));
  EXPECT_EQ(foodanno::category_color(2), (Rgb{157, 242, 36}));
  EXPECT_EQ(foodanno::category_color(3), (Rgb{242, 36, 217}));
  EXPECT_EQ(foodanno::category_color(103), (Rgb{36, 48, 242}));
}

TEST(CategoryColorTest, AgreesWithHsvOracle) {
  for (int id = 0; id < 500; ++id) {
    double hue = id * 0.6180339887;
    hue -= static_cast<long long>(hue);
    const Rgb want = oracle::hsv_color(hue, 0.85, 0.95);
    const Rgb got = foodanno::category_color(id);
    ASSERT_LE(std::abs(got.r - want.r), 1) << id;
    ASSERT_LE(std::abs(got.g - want.g), 1) << id;
    ASSERT_LE(std::abs(got.b - want.b), 1) << id;
  }
}

TEST(CategoryRegistryTest, DenseIdsAndColors) {
  CategoryRegistry reg;
  EXPECT_EQ(reg.add("rice", CategorySource::File), 0);
  EXPECT_EQ(reg.add("chicken"), 1);
  EXPECT_EQ(reg.at(1).name, "chicken");
  EXPECT_EQ(reg.at(1).color, foodanno::category_color(1));
  EXPECT_EQ(reg.at(1).source, CategorySource::UserAdded);
  EXPECT_EQ(reg.at(0).source, CategorySource::File);
}

TEST(CategoryRegistryTest, NamesAreTrimmedAndCaseInsensitive) {
  CategoryRegistry reg;
  reg.add("  Rice ");
  EXPECT_EQ(reg.at(0).name, "Rice");
  EXPECT_EQ(reg.find("rice"), 0);
  EXPECT_EQ(reg.find(" RICE"), 0);
  EXPECT_FALSE(reg.find("bread"));
  try {
    reg.add("RICE");
    FAIL();
  } catch (const foodanno::Error& e) {
    EXPECT_EQ(e.code(), Errc::DuplicateCategory);
  }
  try {
    reg.add("   ");
    FAIL();
  } catch (const foodanno::Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyName);
  }
  EXPECT_EQ(reg.size(), 1u);
}

TEST(CategoryRegistryTest, UnknownIdThrows) {
  CategoryRegistry reg;
  reg.add("a");
  EXPECT_FALSE(reg.contains(1));
  EXPECT_FALSE(reg.contains(-1));
  try {
    reg.at(1);
    FAIL();
  } catch (const foodanno::Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownCategory);
  }
}

TEST(CategorySourceTest, NamesRoundTrip) {
  EXPECT_EQ(foodanno::category_source_name(CategorySource::File), "file");
  EXPECT_EQ(foodanno::category_source_name(CategorySource::UserAdded), "user");
  EXPECT_EQ(foodanno::parse_category_source("user"), CategorySource::UserAdded);
  EXPECT_FALSE(foodanno::parse_category_source("other"));
}

}  // namespace
