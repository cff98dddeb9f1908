#include "fixtures.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <random>
#include <sys/wait.h>

#include "foodanno/synthetic.hpp"

namespace fixtures {

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "foodanno-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

foodanno::RgbImage square_on_white(int width, int height, int x0, int y0, int size, foodanno::Rgb color) {
  foodanno::RgbImage img(width, height, {255, 255, 255});
  for (int y = y0; y < y0 + size; ++y) {
    for (int x = x0; x < x0 + size; ++x) img.set(x, y, color);
  }
  return img;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + FOODANNO_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path test_data(const std::string& name) {
  return std::filesystem::path(FOODANNO_TEST_DATA) / name;
}

foodanno::Session random_session(std::uint64_t seed, std::shared_ptr<foodanno::Backend> backend) {
  using namespace foodanno;
  std::mt19937_64 gen(seed);
  const int w = 24 + static_cast<int>(gen() % 40);
  const int h = 24 + static_cast<int>(gen() % 40);
  SyntheticImage synth = make_synthetic_image(gen(), w, h, 5);

  CategoryRegistry reg;
  const int base = static_cast<int>(gen() % 4);
  for (int i = 0; i < base; ++i) reg.add("food " + std::to_string(i), CategorySource::File);

  Session s(synth.image, "meal_" + std::to_string(seed) + ".png", std::move(backend), std::move(reg));
  for (const SyntheticBlob& blob : synth.blobs) {
    s.add_point({blob.centroid.x, blob.centroid.y, Polarity::Include});
    s.semi_segment();
    if (gen() % 2) {
      std::vector<PixelCoord> path;
      for (int i = 0, n = 1 + static_cast<int>(gen() % 3); i < n; ++i)
        path.push_back({static_cast<int>(gen() % w), static_cast<int>(gen() % h)});
      s.brush_stroke(path, 1 + static_cast<int>(gen() % 3), BrushMode::Add);
    }
    std::optional<Quantity> q;
    switch (gen() % 3) {
      case 0:
        q = Quantity{static_cast<double>(gen() % 100000) / 8.0, QuantityUnit::Gram};
        break;
      case 1:
        q = Quantity{static_cast<double>(gen() % 5000) * 0.1, QuantityUnit::Milliliter};
        break;
      default:
        break;
    }
    if (s.registry().size() == 0 || gen() % 3 == 0) {
      s.validate_item_with_new_category("dish " + std::to_string(s.next_item_id()) + " ünïcode", q);
    } else {
      s.validate_item(static_cast<int>(gen() % s.registry().size()), q);
    }
  }
  if (!s.items().empty() && gen() % 4 == 0) s.delete_item(s.items().front().item_id);
  return s;
}

}  // namespace fixtures
