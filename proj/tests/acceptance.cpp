// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// Exit status is the number of failed criteria not listed with
// --known-unattainable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "octic/activation.hpp"
#include "octic/attention.hpp"
#include "octic/bench.hpp"
#include "octic/dataset.hpp"
#include "octic/embedding.hpp"
#include "octic/equiv_linear.hpp"
#include "octic/fault.hpp"
#include "octic/flops.hpp"
#include "octic/intensity.hpp"
#include "octic/invariants.hpp"
#include "octic/model.hpp"
#include "octic/norm.hpp"
#include "octic/parallel.hpp"
#include "octic/training.hpp"

using namespace octic;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Matrix randn(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Matrix::NullaryExpr(rows, cols, [&] { return n(rng); });
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

int failures = 0;
int counted_failures = 0;
std::set<int> known_unattainable;

void report(int id, bool ok, const std::string& detail) {
  const bool excused = !ok && known_unattainable.count(id);
  std::printf("criterion %2d: %s  %s%s\n", id, ok ? "PASS" : "FAIL", detail.c_str(),
              excused ? "  [known unattainable, not counted in exit status]" : "");
  std::fflush(stdout);
  if (!ok) ++failures;
  if (!ok && !excused) ++counted_failures;
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. Fourier matrix, block diagonalisation, butterflies.
void criterion1() {
  const auto t0 = Clock::now();
  const Matrix8d q = fourier_matrix();
  double err = max_abs(q * q.transpose() - Matrix8d::Identity());
  for (auto g : all_elements()) err = std::max(err, max_abs(q.transpose() * regular_matrix(g) * q - isotypical_matrix(g)));
  std::mt19937_64 rng(1);
  const Matrix x = randn(8, 10000, rng);
  err = std::max(err, max_abs(isotypical_to_regular(x) - q * x));
  err = std::max(err, max_abs(regular_to_isotypical(x) - q.transpose() * x));
  const double t = seconds_since(t0);
  report(1, err < 1e-13 && t < 1.0, fmt("max error %.2e", err) + fmt(", %.3f s", t));
}

// 2. Reynolds projection of random dense maps hits the block pattern.
double schur_pattern_error() {
  std::mt19937_64 rng(2);
  const auto rep = Representation::iso_multiple(1);
  double err = 0;
  for (int t = 0; t < 100; ++t) {
    const Matrix p = reynolds_project_intertwiner(randn(8, 8, rng), rep, rep);
    err = std::max(err, max_abs(assemble_dense(extract_blocks(p)) - p));
  }
  return err;
}

void criterion2() {
  const double err = schur_pattern_error();
  const bool twelve = equiv_linear_macs_per_token(8, 8) == 12;
  report(2, err < 1e-12 && twelve, fmt("off-pattern mass %.2e", err) + ", 12 multiplications per 8x8 map");
}

// 3. Every octic layer, 100 random inputs.
double layer_equivariance_error() {
  std::mt19937_64 rng(3);
  const int C = 32, N = 4, P = 4;
  const GridGeometry grid{N, false};
  const GridGeometry with_cls{N, true};
  auto block = make_octic_block(C, 2, 4 * C, rng);
  block.norm1.gains = randn(kEquivNormGains, 1, rng);
  block.norm2.gains = randn(kEquivNormGains, 1, rng);
  const auto linear = EquivLinearWeights::random(C, C, true, rng);
  EquivNormParams norm;
  norm.gains = randn(kEquivNormGains, 1, rng);
  auto embed = PatchEmbedWeights::random(C, P, true, rng);
  embed.bias = randn(C / 8, 1, rng);
  const Matrix posenc = reynolds_project_posenc(randn(C, N * N, rng), grid);
  const Vector cls = project_cls(randn(C, 1, rng));

  const std::vector<FeatureMap> maps{
      [&](const SteerableFeature& f) { return equiv_linear_forward(linear, f); },
      [&](const SteerableFeature& f) { return equiv_layernorm(f, norm); },
      [](const SteerableFeature& f) { return equiv_gelu(f); },
      [&](const SteerableFeature& f) { return mha_forward(block, f); },
      [&](const SteerableFeature& f) { return block_forward(block, f); },
  };
  const FeatureMap posenc_map = [&](const SteerableFeature& f) { return add_posenc_and_cls(f, posenc, cls); };
  const ImageMap embed_map = [&](const Image& img) { return patch_embed(embed, img); };

  double worst = 0;
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 100; ++t) {
    const SteerableFeature x{randn(C, with_cls.tokens(), rng), ChannelRep::IsoMultiple, with_cls};
    for (const auto& f : maps) worst = std::max(worst, equivariance_residual(f, x));
    const SteerableFeature g{randn(C, grid.tokens(), rng), ChannelRep::IsoMultiple, grid};
    worst = std::max(worst, equivariance_residual(posenc_map, g));
    Image img(N * P);
    for (Eigen::Index i = 0; i < img.pixels.size(); ++i) img.pixels[i] = u(rng);
    worst = std::max(worst, equivariance_residual(embed_map, img));
  }
  return worst;
}

void criterion3() {
  const auto t0 = Clock::now();
  const double err = layer_equivariance_error();
  const double t = seconds_since(t0);
  report(3, err < 1e-11 && t < 30.0, fmt("worst residual %.2e over 7 maps x 100 inputs", err) + fmt(", %.2f s", t));
}

// 4. Full-model gradient against central differences, step 1e-6.
void criterion4() {
  ModelConfig cfg;
  cfg.family = Family::D8;
  cfg.depth = 2;
  cfg.octic_depth = 2;
  cfg.width = 16;
  cfg.heads = 1;
  cfg.image = 16;
  cfg.patch = 4;
  cfg.seed = 4;
  const Model m = build_model(cfg);
  const auto batch = synthetic_dataset(2, SyntheticOptions{}, 4);
  LossAndGrad lg = loss_and_grad(m, batch);
  ModelParams probe_base = m.params;
  const auto groups = probe_base.tensors(cfg);
  auto grads = lg.grad.tensors(cfg);
  std::mt19937_64 rng(44);
  const double h = 1e-6;
  double worst = 0, worst_abs = 0, worst_large = 0;
  int samples = 0, over = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const std::string& path = groups[i].path;
    const bool constrained = path.rfind("embed", 0) == 0 || path == "posenc" || path == "cls";
    for (int k = 0; k < 5; ++k) {
      ModelParams dir = zeros_like(cfg, m.params);
      {
        auto dt = dir.tensors(cfg);
        if (constrained) {
          dt[i].map() = randn(dt[i].rows, dt[i].cols, rng);
        } else {
          dt[i].data[std::uniform_int_distribution<Eigen::Index>(0, dt[i].size() - 1)(rng)] = 1.0;
        }
      }
      if (constrained) project_constrained(cfg, dir);
      auto dt = dir.tensors(cfg);
      const double analytic = (dt[i].map().array() * grads[i].map().array()).sum();
      auto loss_at = [&](double step) {
        Model probe = m;
        auto pt = probe.params.tensors(cfg);
        pt[i].map() += step * dt[i].map();
        return loss_and_grad(probe, batch).loss;
      };
      const double fd = (loss_at(h) - loss_at(-h)) / (2 * h);
      const double rel = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-300});
      worst = std::max(worst, rel);
      worst_abs = std::max(worst_abs, std::abs(fd - analytic));
      if (rel >= 1e-6) ++over;
      if (std::abs(analytic) >= 1e-3) worst_large = std::max(worst_large, rel);
      ++samples;
    }
  }
  // FD roundoff is about eps * loss / h ~ 2e-10 absolute, so entries with
  // gradients below ~2e-4 cannot reach 1e-6 relative error at this step.
  report(4, worst < 1e-6,
         fmt("worst relative error %.2e", worst) + " (" + std::to_string(over) + " of " + std::to_string(samples) +
             " samples in " + std::to_string(groups.size()) + " groups at or above 1e-6)" +
             fmt("; worst absolute error %.1e", worst_abs) + fmt("; worst relative error where |grad| >= 1e-3: %.1e", worst_large));
}

// 5. FLOP ratios.
void criterion5() {
  const double single = linear_macs(1024, 4096, BlockKind::Standard) / linear_macs(1024, 4096, BlockKind::Octic);
  bool monotone = true;
  double prev = 0;
  std::string sweep;
  for (long c : {384L, 768L, 1536L, 3072L, 6144L}) {
    const auto cmp = compare_block(c, c / 64, 197, 4 * c);
    monotone = monotone && cmp.matmul_ratio() > prev && cmp.matmul_ratio() < 16.0 / 3.0;
    prev = cmp.matmul_ratio();
    sweep += fmt(" %.2f", prev);
  }
  bool table_ok = true;
  std::string table;
  for (const auto& s : named_shapes()) {
    const double r = compare_model(*shape_config(s.name)).matmul_ratio();
    table_ok = table_ok && std::abs(r - s.reference_ratio) <= 0.25;
    table += " " + std::string(s.name) + fmt("=%.2f", r) + fmt("(%.2f)", s.reference_ratio);
  }
  report(5, single == 16.0 / 3.0 && monotone && table_ok,
         fmt("linear ratio %.6f;", single) + " sweep" + sweep + "; shapes" + table);
}

// 6. Parameter counts.
void criterion6() {
  bool ok = true;
  for (auto [ci, co] : {std::pair{8, 8}, std::pair{16, 24}, std::pair{64, 256}, std::pair{1024, 4096}, std::pair{6144, 24576}}) {
    const auto w = EquivLinearWeights::zeros(ci, co, false);
    ok = ok && 8 * w.parameter_count() == static_cast<std::int64_t>(ci) * co;
  }
  report(6, ok, "octic linear parameters = dense / 8 for 5 shapes");
}

// 7. Arithmetic intensity crossover.
void criterion7() {
  const auto x = intensity_crossover(196, 2, 4, 256, 8192);
  report(7, x.found && x.c_star >= 3000 && x.c_star <= 3400 && x.relative_residual < 1e-9,
         fmt("C* = %.1f", x.c_star) + fmt(", relative residual %.1e", x.relative_residual));
}

// 8. Invariance of every psi.
void criterion8() {
  std::mt19937_64 rng(8);
  const int C = 16;
  const Matrix x = randn(C, 1000, rng);
  bool ok = true;
  std::string detail;
  for (auto kind : kInvariantKinds) {
    InvariantParams p;
    if (kind == InvariantKind::MaxFiltering) p.templates = randn(2 * C, C, rng);
    if (kind == InvariantKind::Canonisation) p.reference = randn(C, 1, rng);
    const Matrix base = psi(kind, p, x);
    double worst = 0;
    for (auto g : all_elements()) {
      const Matrix moved = psi(kind, p, apply_iso_action(g, x));
      worst = std::max(worst, max_abs(moved - base) / std::max(1.0, max_abs(base)));
    }
    const bool dims = base.rows() == invariant_dim(kind, C) &&
                      invariant_dim(kind, C) * 8 == invariant_multiplicity(kind) * C;
    ok = ok && dims && worst < 1e-12;
    detail += " " + std::string(invariant_name(kind)) + "(K=" + std::to_string(invariant_multiplicity(kind)) + ")" +
              fmt("=%.1e", worst);
  }
  report(8, ok, "residuals" + detail);
}

// 9. Trained D8 and I8 toy models.
struct TrainedRun {
  EvalResult eval;
  double seconds;
};

TrainedRun train_toy(Family family, int octic_depth) {
  ModelConfig cfg;
  cfg.family = family;
  cfg.depth = 2;
  cfg.octic_depth = octic_depth;
  cfg.width = 32;
  cfg.heads = 1;
  cfg.seed = 0;
  TrainOptions opt;
  opt.steps = 2000;
  opt.batch = 32;
  opt.optimizer = Optimizer::Adam;
  opt.lr = 3e-3;
  opt.eval_every = 2000;
  opt.threads = thread_count();
  const auto eval_set = synthetic_dataset(opt.eval_size, opt.data, opt.data_seed + 1000003);
  Model m = build_model(cfg);
  const auto t0 = Clock::now();
  const auto result = train(m, opt, {}, eval_set);
  return {result.final_eval, seconds_since(t0)};
}

void criterion9() {
  bool ok = true;
  std::string detail;
  for (auto [family, k] : {std::pair{Family::D8, 2}, std::pair{Family::I8, 1}}) {
    const auto r = train_toy(family, k);
    ok = ok && r.eval.acc >= 0.9 && r.seconds < 300 && r.eval.max_logit_gap < 1e-9 && r.eval.rot_acc == r.eval.acc;
    detail += std::string(family_name(family)) + fmt(": acc %.3f", r.eval.acc) + fmt(" rot_acc %.3f", r.eval.rot_acc) +
              fmt(" logit gap %.1e", r.eval.max_logit_gap) + fmt(" %.0f s; ", r.seconds);
  }
  const auto control = train_toy(Family::Standard, 0);
  detail += fmt("standard control (not asserted): acc %.3f", control.eval.acc) +
            fmt(" rot_acc %.3f", control.eval.rot_acc);
  report(9, ok, detail);
}

// 10. Benchmark ordering and the weight-sharing mutation.
void criterion10() {
  bool ok = true;
  std::string detail;
  for (int c : {1024, 2048}) {
    BenchOptions opt;
    opt.channels = c;
    const auto r = bench_mlp(opt);
    ok = ok && r.octic.mean_us < r.standard.mean_us;
    detail += "C=" + std::to_string(c) + fmt(": standard %.0f us", r.standard.mean_us) +
              fmt(", octic %.0f us; ", r.octic.mean_us);
  }
  double pattern, layers;
  {
    ScopedFault fault(Fault::UnsharedE);
    pattern = schur_pattern_error();
    layers = layer_equivariance_error();
  }
  const bool caught = pattern >= 1e-12 || layers >= 1e-11;
  ok = ok && caught;
  detail += fmt("unshared-E mutant: pattern %.2e", pattern) + fmt(", layers %.2e", layers) +
            (caught ? " (caught)" : " (missed)");
  report(10, ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
  // --known-unattainable N: criterion N still reports FAIL but does not count
  // towards the exit status.
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) == "--known-unattainable") known_unattainable.insert(std::stoi(argv[i + 1]));
  }
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return counted_failures;
}
