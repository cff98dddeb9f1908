#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "foodanno/image.hpp"
#include "foodanno/session.hpp"

namespace fixtures {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// `size` x `size` square of `color` with its top-left corner at (x0, y0).
foodanno::RgbImage square_on_white(int width, int height, int x0, int y0, int size, foodanno::Rgb color);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

// Runs the CLI with `args`, returns its exit code.
int run_cli(const std::string& args);

std::filesystem::path test_data(const std::string& name);

// A session annotated through the public operations: one validated item per
// synthetic blob, mixed quantities, file and user categories.
foodanno::Session random_session(std::uint64_t seed, std::shared_ptr<foodanno::Backend> backend);

}  // namespace fixtures
