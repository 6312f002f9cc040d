#include "octic/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "octic/activation.hpp"
#include "octic/dense.hpp"
#include "octic/equiv_linear.hpp"
#include "octic/flops.hpp"
#include "octic/parallel.hpp"

namespace octic {

namespace {

TimingStats time_runs(const BenchOptions& opt, const std::function<void()>& run) {
  for (int i = 0; i < opt.warmup; ++i) run();
  std::vector<double> us(opt.trials);
  for (auto& t : us) {
    const auto start = std::chrono::steady_clock::now();
    run();
    t = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
  }
  TimingStats s;
  for (double t : us) s.mean_us += t;
  s.mean_us /= us.size();
  for (double t : us) s.stddev_us += (t - s.mean_us) * (t - s.mean_us);
  s.stddev_us = std::sqrt(s.stddev_us / (us.size() - 1));
  std::vector<double> means;
  for (std::size_t i = 0; i + 5 <= us.size(); i += 5) {
    means.push_back((us[i] + us[i + 1] + us[i + 2] + us[i + 3] + us[i + 4]) / 5.0);
  }
  std::nth_element(means.begin(), means.begin() + means.size() / 2, means.end());
  s.median_of_means_us = means[means.size() / 2];
  return s;
}

// Splits the columns of x into `threads` contiguous slices.
void run_split(const Matrix& x, Matrix& y, int threads, const std::function<Matrix(const Matrix&)>& f) {
  if (threads <= 1) {
    y = f(x);
    return;
  }
  const int n = static_cast<int>(x.cols());
  parallel_for(threads, threads, [&](int t) {
    const int lo = n * t / threads;
    const int hi = n * (t + 1) / threads;
    if (hi > lo) y.middleCols(lo, hi - lo) = f(x.middleCols(lo, hi - lo));
  });
}

}  // namespace

BenchResult bench_mlp(const BenchOptions& opt) {
  if (opt.trials < 30) throw std::invalid_argument("bench needs at least 30 trials");
  if (opt.warmup < 10) throw std::invalid_argument("bench needs at least 10 warm-up runs");
  if (opt.channels % 8 != 0 || opt.channels <= 0) throw std::invalid_argument("channels must be a positive multiple of 8");
  if (opt.tokens <= 0) throw std::invalid_argument("tokens must be positive");
  const int c = opt.channels;
  const int f = 4 * c;
  std::mt19937_64 rng(opt.seed);
  const DenseLinear d1 = DenseLinear::random(c, f, true, rng);
  const DenseLinear d2 = DenseLinear::random(f, c, true, rng);
  const EquivLinearWeights e1 = EquivLinearWeights::random(c, f, true, rng);
  const EquivLinearWeights e2 = EquivLinearWeights::random(f, c, true, rng);
  std::normal_distribution<double> normal;
  const Matrix x = Matrix::NullaryExpr(c, opt.tokens, [&] { return normal(rng); });
  Matrix y(c, opt.tokens);

  BenchResult r;
  r.standard = time_runs(opt, [&] {
    run_split(x, y, opt.threads, [&](const Matrix& in) { return dense_forward(d2, gelu_forward(dense_forward(d1, in))); });
  });
  r.octic = time_runs(opt, [&] {
    run_split(x, y, opt.threads, [&](const Matrix& in) {
      return equiv_linear_forward(e2, equiv_gelu_forward(equiv_linear_forward(e1, in)));
    });
  });
  const auto cmp = compare_block(c, 1, opt.tokens, f);
  double lin_s = 0, lin_o = 0, tot_s = 0, tot_o = 0;
  for (std::size_t i = 0; i < cmp.standard.layers.size(); ++i) {
    const auto& name = cmp.standard.layers[i].name;
    if (name.rfind("mlp.", 0) != 0) continue;
    lin_s += cmp.standard.layers[i].count.linear;
    lin_o += cmp.octic.layers[i].count.linear;
    tot_s += cmp.standard.layers[i].count.total();
    tot_o += cmp.octic.layers[i].count.total();
  }
  r.linear_mac_ratio = lin_s / lin_o;
  r.total_op_ratio = tot_s / tot_o;
  return r;
}

}  // namespace octic
