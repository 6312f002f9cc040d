#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "octic/checkpoint.hpp"
#include "octic/config.hpp"
#include "octic/netpbm.hpp"
#include "test_util.hpp"

using namespace octic;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("octic_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream f(p, std::ios::binary);
  f << bytes;
}

}  // namespace

TEST_CASE("netpbm round trip, 8 and 16 bit") {
  TempDir dir("netpbm");
  for (int maxval : {255, 65535}) {
    for (int channels : {1, 3}) {
      NetpbmImage img{5, 4, channels, maxval, {}};
      for (int i = 0; i < 5 * 4 * channels; ++i) img.samples.push_back(static_cast<std::uint16_t>((i * 977) % (maxval + 1)));
      const fs::path p = dir.path / "img.pnm";
      write_netpbm(p, img);
      const auto back = read_netpbm(p);
      CHECK(back.width == 5);
      CHECK(back.height == 4);
      CHECK(back.channels == channels);
      CHECK(back.maxval == maxval);
      CHECK(back.samples == img.samples);
    }
  }
}

TEST_CASE("netpbm header comments and errors") {
  TempDir dir("netpbm_hdr");
  const fs::path p = dir.path / "c.pgm";
  write_bytes(p, std::string("P5\n# made by hand\n2 # width\n2\n255\n") + std::string("\x00\x40\x80\xff", 4));
  const auto img = read_netpbm(p);
  CHECK(img.samples == std::vector<std::uint16_t>{0, 64, 128, 255});
  const Image im = to_image(img);
  CHECK(im.size == 2);
  CHECK(im.at(2, 1, 1) == 1.0);
  CHECK(im.at(1, 0, 1) == doctest::Approx(64.0 / 255));

  write_bytes(p, "P5\n2 2\n255\n\x01");
  CHECK_THROWS_AS(read_netpbm(p), std::runtime_error);
  write_bytes(p, "P3\n2 2\n255\n1 2 3 4");
  CHECK_THROWS_AS(read_netpbm(p), std::runtime_error);
  CHECK_THROWS_AS(read_netpbm(dir.path / "missing.pgm"), std::runtime_error);
  CHECK_THROWS(to_image(NetpbmImage{3, 2, 1, 255, std::vector<std::uint16_t>(6)}));
}

TEST_CASE("manifest loading") {
  TempDir dir("manifest");
  fs::create_directories(dir.path / "imgs");
  NetpbmImage img{4, 4, 3, 255, std::vector<std::uint16_t>(48, 200)};
  write_netpbm(dir.path / "imgs" / "a.ppm", img);
  write_netpbm(dir.path / "imgs" / "b.ppm", img);
  write_bytes(dir.path / "m.csv", "# path,label\nimgs/a.ppm,3\n\nimgs/b.ppm,5\n");
  const auto samples = load_manifest(dir.path / "m.csv");
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].label == 3);
  CHECK(samples[1].label == 5);
  CHECK(samples[1].image.size == 4);
  write_bytes(dir.path / "bad.csv", "imgs/a.ppm\n");
  CHECK_THROWS(load_manifest(dir.path / "bad.csv"));
  CHECK_THROWS(load_manifest(dir.path / "none.csv"));
}

TEST_CASE("checkpoint round trip is bit-exact") {
  TempDir dir("ckpt");
  ModelConfig cfg;
  cfg.family = Family::I8;
  cfg.depth = 2;
  cfg.octic_depth = 1;
  cfg.invariant = InvariantKind::MaxFiltering;
  cfg.seed = 17;
  Model m = build_model(cfg);
  const fs::path p = dir.path / "m.ckpt";
  save_checkpoint(p, m);
  Model back = load_checkpoint(p);
  CHECK(model_config_text(back.config) == model_config_text(m.config));
  auto a = m.params.tensors(m.config);
  auto b = back.params.tensors(back.config);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].path == b[i].path);
    CHECK(std::memcmp(a[i].data, b[i].data, sizeof(double) * a[i].size()) == 0);
  }
  std::ifstream js(p.string() + ".json");
  const auto manifest = nlohmann::json::parse(js);
  CHECK(manifest["tensors"].size() == a.size());

  // Corruptions are reported.
  std::string bytes;
  {
    std::ifstream f(p, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(f), {});
  }
  write_bytes(p, "NOTACKPT" + bytes.substr(8));
  CHECK_THROWS_AS(load_checkpoint(p), std::runtime_error);
  write_bytes(p, bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_checkpoint(p), std::runtime_error);
}

TEST_CASE("filter dump") {
  TempDir dir("filters");
  auto w = PatchEmbedWeights::zeros(16, 4, true);
  const auto paths = dump_filters(w, dir.path);
  CHECK(paths.size() == 16 * 3);
  CHECK(paths.front().filename() == "A1_000_c0.pgm");
  const auto img = read_netpbm(paths.back());
  CHECK(img.width == 4);
  for (auto s : img.samples) CHECK(s == 128);

  Matrix plane(2, 2);
  plane << -1, 0, 0.5, 1;
  const auto pgm = kernel_plane_to_pgm(plane);
  CHECK(pgm.samples == std::vector<std::uint16_t>{0, 128, 191, 255});

  std::mt19937_64 rng(1);
  const auto plain = dump_filters(PatchEmbedWeights::random(8, 2, false, rng), dir.path / "plain");
  CHECK(plain.front().filename() == "ch_000_c0.pgm");
}
