#include <doctest.h>

#include <random>

#include "octic/embedding.hpp"
#include "test_util.hpp"

using namespace octic;
using testutil::max_abs;
using testutil::randn;

TEST_CASE("zero image embeds to zero") {
  std::mt19937_64 rng(31);
  auto w = PatchEmbedWeights::random(16, 4, true, rng);
  w.bias.setZero();
  const auto f = patch_embed(w, Image(16));
  CHECK(f.data.rows() == 16);
  CHECK(f.data.cols() == 16);
  CHECK(max_abs(f.data) == 0.0);
}

TEST_CASE("projected kernel satisfies the intertwiner constraint") {
  std::mt19937_64 rng(32);
  for (int p : {2, 3, 4}) {
    PatchEmbedWeights w = PatchEmbedWeights::zeros(16, p, true);
    w.w = randn(16, 3 * p * p, rng);
    CHECK(patch_kernel_violation(w.w, p) > 0.1);
    w.project();
    CHECK(patch_kernel_violation(w.w, p) < 1e-12);
    CHECK(w.bias.size() == 2);
  }
  const auto plain = PatchEmbedWeights::random(10, 4, false, rng);
  CHECK(plain.bias.size() == 10);
}

TEST_CASE("octic patch embedding is equivariant") {
  std::mt19937_64 rng(33);
  auto w = PatchEmbedWeights::random(16, 4, true, rng);
  w.bias = randn(2, 1, rng);
  const Image img = testutil::random_image(16, rng);
  CHECK(equivariance_residual([&](const Image& im) { return patch_embed(w, im); }, img) < 1e-12);
  CHECK_THROWS_AS(patch_embed(w, testutil::random_image(18, rng)), std::invalid_argument);
}

TEST_CASE("patch embedding parameter gradient") {
  std::mt19937_64 rng(34);
  auto w = PatchEmbedWeights::random(16, 2, true, rng);
  const Matrix patches = randn(12, 9, rng);
  const Matrix dy = randn(16, 9, rng);
  const auto g = patch_embed_vjp(w, patches, dy);
  const auto loss = [&] { return (dy.array() * patch_embed_forward(w, patches).array()).sum(); };
  for (auto [i, j] : {std::pair{0, 0}, std::pair{7, 5}, std::pair{15, 11}}) {
    const double saved = w.w(i, j);
    const double fd = testutil::directional_fd([&](double h) {
      w.w(i, j) = saved + h;
      return loss();
    });
    w.w(i, j) = saved;
    CHECK(testutil::rel_err(fd, g.w(i, j)) < 1e-6);
  }
  const double saved = w.bias[1];
  const double fd = testutil::directional_fd([&](double h) {
    w.bias[1] = saved + h;
    return loss();
  });
  w.bias[1] = saved;
  CHECK(testutil::rel_err(fd, g.bias[1]) < 1e-6);
}

TEST_CASE("positional encoding and class token") {
  std::mt19937_64 rng(35);
  const GridGeometry geo{3, false};
  const Matrix x = randn(16, 9, rng);
  const Matrix e = reynolds_project_posenc(randn(16, 9, rng), geo);
  Vector cls = Vector::Zero(16);
  cls.head(2) << 1.0, -2.0;
  const Matrix y = add_posenc_and_cls(x, e, cls, true);
  REQUIRE(y.cols() == 10);
  CHECK(max_abs(y.leftCols(9) - (x + e)) == 0.0);
  CHECK(max_abs(y.col(9) - cls) == 0.0);

  Vector bad = cls;
  bad[4] = 0.5;  // B1 entry
  CHECK_THROWS_AS(add_posenc_and_cls(x, e, bad, true), std::invalid_argument);
  CHECK_NOTHROW(add_posenc_and_cls(x, e, bad, false));
  CHECK(max_abs(project_cls(bad) - cls) == 0.0);
  CHECK_THROWS_AS(add_posenc_and_cls(x, randn(16, 9, rng), cls, true), std::invalid_argument);

  const SteerableFeature f{x, ChannelRep::IsoMultiple, geo};
  const auto g = add_posenc_and_cls(f, e, cls);
  CHECK(g.geometry.has_cls);
  CHECK(equivariance_residual([&](const SteerableFeature& in) { return add_posenc_and_cls(in, e, cls); }, f) <
        1e-12);
}
