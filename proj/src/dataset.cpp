#include "octic/dataset.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

namespace octic {

namespace {

using Shape = std::function<bool(double, double)>;

bool box(double x, double y, double x0, double x1, double y0, double y1) {
  return x >= x0 && x <= x1 && y >= y0 && y <= y1;
}

// Silhouettes on [-1, 1]^2 with y pointing down the image.
const std::array<Shape, kSyntheticClasses>& shapes() {
  static const std::array<Shape, kSyntheticClasses> table{
      [](double x, double y) { return box(x, y, -0.75, 0.75, -0.2, 0.2); },
      [](double x, double y) { return box(x, y, -0.6, 0.6, 0.25, 0.6) || box(x, y, -0.6, -0.25, -0.6, 0.6); },
      [](double x, double y) { return box(x, y, -0.65, 0.65, -0.65, -0.3) || box(x, y, -0.17, 0.17, -0.65, 0.65); },
      [](double x, double y) { return box(x, y, -0.17, 0.17, -0.65, 0.65) || box(x, y, -0.65, 0.65, -0.17, 0.17); },
      [](double x, double y) { return box(x, y, -0.5, 0.5, -0.5, 0.5); },
      [](double x, double y) {
        const double m = std::max(std::abs(x), std::abs(y));
        return m >= 0.4 && m <= 0.65;
      },
      [](double x, double y) { return x * x + y * y <= 0.65 * 0.65 && !(x > 0.1 && std::abs(y) < 0.2); },
      [](double x, double y) {
        auto dot = [&](double cx, double cy) { return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= 0.2 * 0.2; };
        return dot(-0.4, -0.4) || dot(0.4, 0.4);
      },
  };
  return table;
}

}  // namespace

std::string_view shape_name(int label) {
  static constexpr std::array<std::string_view, kSyntheticClasses> kNames{
      "bar", "ell", "tee", "cross", "square", "frame", "notched_disk", "dots"};
  if (label < 0 || label >= kSyntheticClasses) throw std::invalid_argument("unknown shape label");
  return kNames[label];
}

Image render_shape(int label, const SyntheticOptions& opt, std::mt19937_64& rng) {
  if (label < 0 || label >= kSyntheticClasses) throw std::invalid_argument("unknown shape label");
  if (opt.image < 4) throw std::invalid_argument("synthetic images need at least 4 pixels per side");
  const Shape& inside = shapes()[label];
  std::uniform_int_distribution<int> shift(-opt.max_shift, opt.max_shift);
  std::uniform_real_distribution<double> scale_dist(0.85, 1.0);
  std::uniform_real_distribution<double> level_dist(0.6, 1.0);
  std::normal_distribution<double> noise(0.0, opt.noise);
  const int dx = shift(rng);
  const int dy = shift(rng);
  const double scale = scale_dist(rng);
  const double level = level_dist(rng);

  const int m = opt.image;
  const double half = 0.5 * m;
  Image img(m);
  for (int row = 0; row < m; ++row) {
    for (int col = 0; col < m; ++col) {
      // 2x2 supersampling.
      int hits = 0;
      for (int sy = 0; sy < 2; ++sy) {
        for (int sx = 0; sx < 2; ++sx) {
          const double px = (col - dx + 0.25 + 0.5 * sx - half) / (half * scale);
          const double py = (row - dy + 0.25 + 0.5 * sy - half) / (half * scale);
          hits += inside(px, py) ? 1 : 0;
        }
      }
      const double v = level * hits / 4.0;
      for (int c = 0; c < 3; ++c) img.at(c, row, col) = v;
    }
  }
  if (opt.noise > 0) {
    for (int row = 0; row < m; ++row) {
      for (int col = 0; col < m; ++col) {
        const double n = noise(rng);
        for (int c = 0; c < 3; ++c) img.at(c, row, col) += n;
      }
    }
  }
  if (opt.random_pose) {
    std::uniform_int_distribution<int> element(0, kGroupOrder - 1);
    img = transform_image(GroupElement(element(rng)), img);
  }
  return img;
}

std::vector<Sample> synthetic_dataset(int count, const SyntheticOptions& opt, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Sample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int label = i % kSyntheticClasses;
    out.push_back({render_shape(label, opt, rng), label});
  }
  return out;
}

}  // namespace octic
