#include "foodanno/category.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "foodanno/error.hpp"

namespace foodanno {

namespace {

std::uint8_t to_byte(double unit) {
  return static_cast<std::uint8_t>(std::floor(unit * 255.0 + 0.5));
}

std::string fold(std::string_view s) {
  std::string out = trim(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

Rgb category_color(int id) {
  constexpr double kGolden = 0.6180339887;
  constexpr double kSaturation = 0.85;
  constexpr double kValue = 0.95;

  double hue = id * kGolden;
  hue -= std::floor(hue);

  const double h6 = hue * 6.0;
  const int sector = static_cast<int>(std::floor(h6)) % 6;
  const double f = h6 - std::floor(h6);
  const double p = kValue * (1.0 - kSaturation);
  const double q = kValue * (1.0 - kSaturation * f);
  const double t = kValue * (1.0 - kSaturation * (1.0 - f));
  double r = 0, g = 0, b = 0;
  switch (sector) {
    case 0: r = kValue; g = t; b = p; break;
    case 1: r = q; g = kValue; b = p; break;
    case 2: r = p; g = kValue; b = t; break;
    case 3: r = p; g = q; b = kValue; break;
    case 4: r = t; g = p; b = kValue; break;
    default: r = kValue; g = p; b = q; break;
  }
  return {to_byte(r), to_byte(g), to_byte(b)};
}

std::string_view category_source_name(CategorySource source) noexcept {
  return source == CategorySource::File ? "file" : "user";
}

std::optional<CategorySource> parse_category_source(std::string_view name) noexcept {
  if (name == "file") return CategorySource::File;
  if (name == "user") return CategorySource::UserAdded;
  return std::nullopt;
}

std::string trim(std::string_view s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

const Category& CategoryRegistry::at(int id) const {
  if (!contains(id)) throw Error(Errc::UnknownCategory, "unknown category id " + std::to_string(id));
  return entries_[static_cast<std::size_t>(id)];
}

std::optional<int> CategoryRegistry::find(std::string_view name) const {
  const std::string key = fold(name);
  for (const Category& c : entries_) {
    if (fold(c.name) == key) return c.id;
  }
  return std::nullopt;
}

int CategoryRegistry::add(std::string_view name, CategorySource source) {
  std::string clean = trim(name);
  if (clean.empty()) throw Error(Errc::EmptyName, "category name is empty");
  if (find(clean)) throw Error(Errc::DuplicateCategory, "category '" + clean + "' already exists");
  const int id = static_cast<int>(entries_.size());
  entries_.push_back({id, std::move(clean), category_color(id), source});
  return id;
}

}  // namespace foodanno
