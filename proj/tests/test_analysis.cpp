#include <doctest.h>

#include <cmath>

#include "octic/bench.hpp"
#include "octic/equiv_linear.hpp"
#include "octic/flops.hpp"
#include "octic/intensity.hpp"

using namespace octic;

namespace {

// Intensity with the work divided by `work_saving` and the weight traffic by
// `param_saving`.
double intensity_oracle(double B, double C, double F, double P, double work_saving, double param_saving) {
  return (2 * B * C * F / work_saving) / (P * (B * C + C * F / param_saving + B * F));
}

}  // namespace

TEST_CASE("single linear layer saves exactly 16/3") {
  for (long c : {8L, 64L, 1024L, 6144L}) {
    CHECK(linear_macs(c, 4 * c, BlockKind::Standard) / linear_macs(c, 4 * c, BlockKind::Octic) == 16.0 / 3.0);
    CHECK(linear_macs(c, c, BlockKind::Octic) == static_cast<double>(equiv_linear_macs_per_token(c, c)));
  }
  for (long c : {384L, 1024L, 6144L}) CHECK(compare_block(c, 16, 197, 4 * c).linear_ratio() == 16.0 / 3.0);
}

TEST_CASE("attention matmuls are the same in both families") {
  const auto cmp = compare_block(256, 4, 65, 1024);
  CHECK(cmp.standard.total.attention == cmp.octic.total.attention);
}

TEST_CASE("hand count of a C = 8 block") {
  const long C = 8, H = 1, L = 2, F = 32;
  const auto s = count_block_flops(C, H, L, F, BlockKind::Standard);
  const auto o = count_block_flops(C, H, L, F, BlockKind::Octic);
  // qkv 3*64, out 64, fc1 256, fc2 256 MACs per token.
  CHECK(s.total.linear == 2 * (3 * 64 + 64 + 256 + 256));
  // Octic: A1..B2 1x1 blocks plus a 2x2 E block per 8x8 map = 12 MACs.
  CHECK(o.total.linear == 2 * (3 * 12 + 12 + 48 + 48));
  CHECK(s.total.attention == 2 * L * L * C);
  CHECK(o.total.attention == 2 * L * L * C);
  // Norms 5/channel twice, GELU 1/unit, softmax 3/logit, residuals 1/channel twice.
  const double other = L * (2 * 5 * C + F + 2 * C) + 3 * H * L * L;
  CHECK(s.total.other == other);
  CHECK(o.total.other == other + 2 * 4 * F * L);
  double sum = 0;
  for (const auto& l : s.layers) sum += l.count.total();
  CHECK(sum == s.total.total());
}

TEST_CASE("block ratio grows with width and stays below 16/3") {
  double prev_mm = 0, prev_tot = 0;
  for (long c : {384L, 768L, 1536L, 3072L, 6144L}) {
    const auto cmp = compare_block(c, c / 64, 197, 4 * c);
    CHECK(cmp.matmul_ratio() > prev_mm);
    CHECK(cmp.total_ratio() > prev_tot);
    CHECK(cmp.matmul_ratio() < 16.0 / 3.0);
    CHECK(cmp.total_ratio() < 16.0 / 3.0);
    prev_mm = cmp.matmul_ratio();
    prev_tot = cmp.total_ratio();
  }
}

TEST_CASE("whole-model ratios for the named shapes") {
  REQUIRE(named_shapes().size() == 5);
  for (const auto& s : named_shapes()) {
    CAPTURE(s.name);
    const auto cfg = shape_config(s.name);
    REQUIRE(cfg.has_value());
    CHECK(cfg->tokens() == 257);
    CHECK(std::abs(compare_model(*cfg).matmul_ratio() - s.reference_ratio) <= 0.25);
  }
  CHECK_FALSE(shape_config("vitx").has_value());
}

TEST_CASE("depth-0 model counts embedding, head and classifier only") {
  ModelConfig cfg;
  cfg.family = Family::D8;
  cfg.depth = 0;
  cfg.octic_depth = 0;
  cfg.width = 64;
  cfg.patch = 4;
  cfg.image = 32;
  cfg.classes = 10;
  const double patches = 64, embed = 3.0 * 16 * 64 * patches, classifier = 64.0 * 10;
  const double head = 6.0 * 64 / 8 * 64 + 64.0 * 64;
  const auto cmp = compare_model(cfg);
  CHECK(cmp.standard.total.matmul() == embed + classifier);
  CHECK(cmp.octic.total.matmul() == embed * 3 / 16 + head + classifier);
  CHECK(cmp.matmul_ratio() == doctest::Approx((embed + classifier) / (embed * 3 / 16 + head + classifier)));
}

TEST_CASE("arithmetic intensity formulas") {
  for (double c : {256.0, 1024.0, 4096.0}) {
    const IntensityModel m{196, c, 4 * c, 2};
    CHECK(arithmetic_intensity(m, BlockKind::Standard) == doctest::Approx(intensity_oracle(196, c, 4 * c, 2, 1, 1)));
    CHECK(arithmetic_intensity(m, BlockKind::Octic) == doctest::Approx(intensity_oracle(196, c, 4 * c, 2, 16.0 / 3, 8)));
  }
  // Large B approaches 2CF / (P (C + F)).
  const IntensityModel big{1e12, 1024, 4096, 2};
  CHECK(arithmetic_intensity(big, BlockKind::Standard) == doctest::Approx(2.0 * 1024 * 4096 / (2 * (1024 + 4096))).epsilon(1e-8));
  CHECK_THROWS_AS(arithmetic_intensity(IntensityModel{0, 1, 1, 1}, BlockKind::Standard), std::invalid_argument);
}

TEST_CASE("intensity crossover") {
  const auto x = intensity_crossover(196, 2, 4, 256, 8192);
  REQUIRE(x.found);
  CHECK(x.c_star >= 3000);
  CHECK(x.c_star <= 3400);
  CHECK(x.relative_residual < 1e-9);
  const IntensityModel below{196, x.c_star * 0.9, 4 * x.c_star * 0.9, 2};
  const IntensityModel above{196, x.c_star * 1.1, 4 * x.c_star * 1.1, 2};
  CHECK(arithmetic_intensity(below, BlockKind::Octic) < arithmetic_intensity(below, BlockKind::Standard));
  CHECK(arithmetic_intensity(above, BlockKind::Octic) > arithmetic_intensity(above, BlockKind::Standard));
  CHECK_FALSE(intensity_crossover(196, 2, 4, 256, 1024).found);
}

TEST_CASE("MLP benchmark") {
  BenchOptions opt;
  opt.channels = 64;
  const auto r = bench_mlp(opt);
  CHECK(r.standard.mean_us > 0);
  CHECK(r.octic.mean_us > 0);
  CHECK(r.linear_mac_ratio == 16.0 / 3.0);
  CHECK(r.total_op_ratio > 1.0);
  CHECK(r.total_op_ratio < 16.0 / 3.0);
  opt.trials = 29;
  CHECK_THROWS_AS(bench_mlp(opt), std::invalid_argument);
  opt.trials = 30;
  opt.warmup = 9;
  CHECK_THROWS_AS(bench_mlp(opt), std::invalid_argument);
}
