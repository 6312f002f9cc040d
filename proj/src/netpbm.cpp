#include "octic/netpbm.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace octic {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& msg) {
  throw std::runtime_error(path.string() + ": " + msg);
}

// Header tokens are separated by whitespace; '#' starts a comment that
// runs to the end of the line.
int read_header_int(std::istream& in, const std::filesystem::path& path) {
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (std::isspace(ch)) {
      ch = in.get();
    } else {
      break;
    }
  }
  if (ch == EOF || !std::isdigit(ch)) fail(path, "malformed header");
  long value = 0;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    if (value > 1'000'000'000) fail(path, "header value too large");
    ch = in.get();
  }
  if (ch == EOF || !std::isspace(ch)) fail(path, "malformed header");
  return static_cast<int>(value);
}

}  // namespace

NetpbmImage read_netpbm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) fail(path, "not a binary PGM/PPM file");
  NetpbmImage img;
  img.channels = magic[1] == '5' ? 1 : 3;
  img.width = read_header_int(in, path);
  img.height = read_header_int(in, path);
  img.maxval = read_header_int(in, path);
  if (img.width <= 0 || img.height <= 0) fail(path, "empty image");
  if (img.maxval <= 0 || img.maxval > 65535) fail(path, "maxval out of range");
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
  const int bytes = img.maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(n * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) fail(path, "truncated pixel data");
  img.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    img.samples[i] = bytes == 1 ? raw[i] : static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    if (img.samples[i] > img.maxval) fail(path, "sample exceeds maxval");
  }
  return img;
}

void write_netpbm(const std::filesystem::path& path, const NetpbmImage& img) {
  if (img.channels != 1 && img.channels != 3) throw std::invalid_argument("netpbm images have 1 or 3 channels");
  if (img.maxval <= 0 || img.maxval > 65535) throw std::invalid_argument("maxval out of range");
  if (img.samples.size() != static_cast<std::size_t>(img.width) * img.height * img.channels) {
    throw std::invalid_argument("sample count does not match dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  out << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
  for (auto s : img.samples) {
    if (img.maxval < 256) {
      out.put(static_cast<char>(s));
    } else {
      out.put(static_cast<char>(s >> 8));
      out.put(static_cast<char>(s & 0xff));
    }
  }
  if (!out) fail(path, "write failed");
}

Image to_image(const NetpbmImage& raster) {
  if (raster.width != raster.height) throw std::runtime_error("images must be square");
  Image img(raster.width);
  const double scale = 1.0 / raster.maxval;
  for (int row = 0; row < raster.height; ++row) {
    for (int col = 0; col < raster.width; ++col) {
      const std::size_t base = (static_cast<std::size_t>(row) * raster.width + col) * raster.channels;
      for (int c = 0; c < 3; ++c) {
        img.at(c, row, col) = raster.samples[base + (raster.channels == 1 ? 0 : c)] * scale;
      }
    }
  }
  return img;
}

std::vector<Sample> load_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) fail(manifest, "cannot open manifest");
  const auto dir = manifest.parent_path();
  std::vector<Sample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) fail(manifest, "line " + std::to_string(lineno) + ": expected path,label");
    int label = 0;
    try {
      std::size_t used = 0;
      label = std::stoi(line.substr(comma + 1), &used);
      if (used != line.size() - comma - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      fail(manifest, "line " + std::to_string(lineno) + ": bad label");
    }
    out.push_back({to_image(read_netpbm(dir / line.substr(0, comma))), label});
  }
  return out;
}

NetpbmImage kernel_plane_to_pgm(const Matrix& plane) {
  NetpbmImage img;
  img.width = static_cast<int>(plane.cols());
  img.height = static_cast<int>(plane.rows());
  img.channels = 1;
  img.maxval = 255;
  const double lo = plane.minCoeff();
  const double hi = plane.maxCoeff();
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const double v = hi > lo ? (plane(r, c) - lo) / (hi - lo) * 255.0 : 128.0;
      img.samples.push_back(static_cast<std::uint16_t>(std::lround(v)));
    }
  }
  return img;
}

std::vector<std::filesystem::path> dump_filters(const PatchEmbedWeights& w, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir.string() + ": " + ec.message());
  const int p = w.patch;
  const int rows = w.channels();
  const int block = w.octic ? iso_block_size(rows) : rows;
  std::vector<std::filesystem::path> out;
  for (int k = 0; k < rows; ++k) {
    const std::string prefix = w.octic ? std::string(iso_component_name(k / block)) : std::string("ch");
    char index[16];
    std::snprintf(index, sizeof index, "%03d", k % block);
    for (int ch = 0; ch < 3; ++ch) {
      Matrix plane(p, p);
      for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) plane(a, b) = w.w(k, (ch * p + a) * p + b);
      }
      const auto path = dir / (prefix + "_" + index + "_c" + std::to_string(ch) + ".pgm");
      write_netpbm(path, kernel_plane_to_pgm(plane));
      out.push_back(path);
    }
  }
  return out;
}

}  // namespace octic
