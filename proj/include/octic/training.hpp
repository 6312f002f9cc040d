#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "octic/dataset.hpp"
#include "octic/model.hpp"

namespace octic {

enum class Optimizer { Sgd, Adam };

struct TrainOptions {
  int steps = 2000;
  int batch = 32;
  double lr = 1e-2;
  double momentum = 0.9;  ///< SGD momentum, or Adam beta1
  double beta2 = 0.999;   ///< Adam only
  Optimizer optimizer = Optimizer::Sgd;
  int eval_every = 100;
  int eval_size = 256;
  int threads = 0;  ///< 0: thread_count()
  std::uint64_t data_seed = 1;
  SyntheticOptions data;  ///< training distribution when no image pool is given
};

struct MetricsRow {
  int step = 0;
  double loss = 0.0;     ///< mean training loss since the previous row
  double acc = 0.0;      ///< eval accuracy
  double rot_acc = 0.0;  ///< eval accuracy over the 7 non-identity transforms of every eval image
};

struct EvalResult {
  double acc = 0.0;
  double rot_acc = 0.0;
  double max_logit_gap = 0.0;  ///< max |logits(g.img) - logits(img)| over images and g
};

EvalResult evaluate(const Model& m, const std::vector<Sample>& data, int threads);

/// Batch gradient with per-sample work spread over threads. Samples are
/// summed in fixed chunks reduced by a fixed binary tree, so the result does
/// not depend on the thread count.
LossAndGrad parallel_loss_and_grad(const Model& m, const std::vector<Sample>& batch, int threads);

struct TrainResult {
  std::vector<MetricsRow> rows;
  EvalResult final_eval;
  double max_constraint_violation = 0.0;  ///< worst value seen after any update
};

/// Trains in place. Batches come from `pool` when it is non-empty, otherwise
/// fresh synthetic samples are drawn every step. Throws std::runtime_error
/// if the loss or any parameter becomes non-finite.
TrainResult train(Model& m, const TrainOptions& opt, const std::vector<Sample>& pool,
                  const std::vector<Sample>& eval_set,
                  const std::function<void(const MetricsRow&)>& on_row = {});

/// One optimiser step with re-projection, exposed for tests.
class OptimizerState {
 public:
  OptimizerState(const Model& m, const TrainOptions& opt);
  void step(Model& m, ModelParams& grad);

 private:
  TrainOptions opt_;
  ModelParams first_, second_;
  int t_ = 0;
};

}  // namespace octic
