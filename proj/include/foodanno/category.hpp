#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "foodanno/image.hpp"

namespace foodanno {

// Deterministic color for a category id: golden-ratio hue stepping at
// saturation 0.85, value 0.95. Independent of any registry.
Rgb category_color(int id);

enum class CategorySource { File, UserAdded };

std::string_view category_source_name(CategorySource source) noexcept;  // "file" | "user"
std::optional<CategorySource> parse_category_source(std::string_view name) noexcept;

struct Category {
  int id = 0;
  std::string name;
  Rgb color;
  CategorySource source = CategorySource::File;

  friend bool operator==(const Category&, const Category&) = default;
};

// Ids are dense from 0 in insertion order; names are unique ignoring case
// and surrounding whitespace.
class CategoryRegistry {
 public:
  const std::vector<Category>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool contains(int id) const noexcept { return id >= 0 && id < static_cast<int>(entries_.size()); }
  const Category& at(int id) const;
  std::optional<int> find(std::string_view name) const;

  // Throws EmptyName or DuplicateCategory; returns the new id.
  int add(std::string_view name, CategorySource source = CategorySource::UserAdded);

  friend bool operator==(const CategoryRegistry&, const CategoryRegistry&) = default;

 private:
  std::vector<Category> entries_;
};

std::string trim(std::string_view s);

}  // namespace foodanno
