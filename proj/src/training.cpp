#include "octic/training.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "octic/parallel.hpp"

namespace octic {

namespace {

constexpr int kReductionChunks = 8;

void add_into(const ModelConfig& cfg, ModelParams& acc, ModelParams& g) {
  auto a = acc.tensors(cfg);
  auto b = g.tensors(cfg);
  for (std::size_t i = 0; i < a.size(); ++i) a[i].map() += b[i].map();
}

int resolve_threads(int threads) { return threads > 0 ? threads : thread_count(); }

}  // namespace

LossAndGrad parallel_loss_and_grad(const Model& m, const std::vector<Sample>& batch, int threads) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const int n = static_cast<int>(batch.size());
  const int chunks = std::min(n, kReductionChunks);
  const double scale = 1.0 / n;
  std::vector<ModelParams> grads(chunks);
  std::vector<double> losses(chunks, 0.0);
  std::vector<int> correct(chunks, 0);
  parallel_for(chunks, resolve_threads(threads), [&](int c) {
    ModelParams acc = zeros_like(m.config, m.params);
    auto acc_list = acc.tensors(m.config);
    const int lo = static_cast<int>(static_cast<long>(n) * c / chunks);
    const int hi = static_cast<int>(static_cast<long>(n) * (c + 1) / chunks);
    for (int i = lo; i < hi; ++i) {
      ForwardTrace t;
      const Vector logits = forward(m, batch[i].image, &t);
      Vector dlogits;
      losses[c] += scale * cross_entropy(logits, batch[i].label, &dlogits);
      correct[c] += predict(logits) == batch[i].label ? 1 : 0;
      ModelParams g = backward(m, t, dlogits);
      auto list = g.tensors(m.config);
      for (std::size_t k = 0; k < list.size(); ++k) acc_list[k].map() += scale * list[k].map();
    }
    grads[c] = std::move(acc);
  });
  for (int stride = 1; stride < chunks; stride *= 2) {
    for (int i = 0; i + stride < chunks; i += 2 * stride) add_into(m.config, grads[i], grads[i + stride]);
  }
  LossAndGrad out;
  for (int c = 0; c < chunks; ++c) {
    out.loss += losses[c];
    out.correct += correct[c];
  }
  out.grad = std::move(grads[0]);
  project_constrained(m.config, out.grad);
  return out;
}

EvalResult evaluate(const Model& m, const std::vector<Sample>& data, int threads) {
  if (data.empty()) return {};
  const int n = static_cast<int>(data.size());
  std::vector<int> hit(n, 0), rot_hit(n, 0);
  std::vector<double> gap(n, 0.0);
  parallel_for(n, resolve_threads(threads), [&](int i) {
    const Vector base = forward(m, data[i].image);
    hit[i] = predict(base) == data[i].label ? 1 : 0;
    for (auto g : all_elements()) {
      if (g == kIdentity) continue;
      const Vector moved = forward(m, transform_image(g, data[i].image));
      rot_hit[i] += predict(moved) == data[i].label ? 1 : 0;
      gap[i] = std::max(gap[i], (moved - base).cwiseAbs().maxCoeff());
    }
  });
  EvalResult r;
  long hits = 0, rot_hits = 0;
  for (int i = 0; i < n; ++i) {
    hits += hit[i];
    rot_hits += rot_hit[i];
    r.max_logit_gap = std::max(r.max_logit_gap, gap[i]);
  }
  r.acc = static_cast<double>(hits) / n;
  r.rot_acc = static_cast<double>(rot_hits) / (static_cast<double>(n) * (kGroupOrder - 1));
  return r;
}

OptimizerState::OptimizerState(const Model& m, const TrainOptions& opt)
    : opt_(opt), first_(zeros_like(m.config, m.params)), second_(zeros_like(m.config, m.params)) {}

void OptimizerState::step(Model& m, ModelParams& grad) {
  ++t_;
  auto p = m.params.tensors(m.config);
  auto g = grad.tensors(m.config);
  auto v = first_.tensors(m.config);
  auto s = second_.tensors(m.config);
  if (opt_.optimizer == Optimizer::Sgd) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i].map() = opt_.momentum * v[i].map() + g[i].map();
      p[i].map() -= opt_.lr * v[i].map();
    }
  } else {
    const double b1 = opt_.momentum;
    const double b2 = opt_.beta2;
    const double c1 = 1.0 - std::pow(b1, t_);
    const double c2 = 1.0 - std::pow(b2, t_);
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i].map() = b1 * v[i].map() + (1.0 - b1) * g[i].map();
      s[i].map() = b2 * s[i].map() + (1.0 - b2) * g[i].map().array().square().matrix();
      p[i].map().array() -= opt_.lr * (v[i].map().array() / c1) / ((s[i].map().array() / c2).sqrt() + 1e-8);
    }
  }
  project_constrained(m.config, m.params);
}

TrainResult train(Model& m, const TrainOptions& opt, const std::vector<Sample>& pool,
                  const std::vector<Sample>& eval_set, const std::function<void(const MetricsRow&)>& on_row) {
  if (opt.steps < 0 || opt.batch <= 0) throw std::invalid_argument("steps and batch must be positive");
  const int threads = resolve_threads(opt.threads);
  OptimizerState state(m, opt);
  std::mt19937_64 rng(opt.data_seed);
  SyntheticOptions data = opt.data;
  data.image = m.config.image;
  TrainResult result;
  double loss_sum = 0.0;
  int loss_count = 0;
  for (int step = 1; step <= opt.steps; ++step) {
    std::vector<Sample> batch;
    batch.reserve(opt.batch);
    if (pool.empty()) {
      std::uniform_int_distribution<int> label(0, std::min(m.config.classes, kSyntheticClasses) - 1);
      for (int i = 0; i < opt.batch; ++i) {
        const int y = label(rng);
        batch.push_back({render_shape(y, data, rng), y});
      }
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      for (int i = 0; i < opt.batch; ++i) batch.push_back(pool[pick(rng)]);
    }
    LossAndGrad lg = parallel_loss_and_grad(m, batch, threads);
    if (!std::isfinite(lg.loss)) {
      throw std::runtime_error("training diverged at step " + std::to_string(step) + ": loss is " +
                               std::to_string(lg.loss) + " (lower the learning rate)");
    }
    state.step(m, lg.grad);
    for (const auto& t : m.params.tensors(m.config)) {
      if (!t.map().allFinite()) {
        throw std::runtime_error("training diverged at step " + std::to_string(step) + ": tensor " + t.path +
                                 " has non-finite entries");
      }
    }
    result.max_constraint_violation = std::max(result.max_constraint_violation, constraint_violation(m));
    loss_sum += lg.loss;
    ++loss_count;
    if ((opt.eval_every > 0 && step % opt.eval_every == 0) || step == opt.steps) {
      const EvalResult e = evaluate(m, eval_set, threads);
      MetricsRow row{step, loss_sum / loss_count, e.acc, e.rot_acc};
      result.rows.push_back(row);
      result.final_eval = e;
      if (on_row) on_row(row);
      loss_sum = 0.0;
      loss_count = 0;
    }
  }
  return result;
}

}  // namespace octic
