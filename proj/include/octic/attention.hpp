#pragma once

#include <random>
#include <vector>

#include "octic/dense.hpp"
#include "octic/equiv_linear.hpp"
#include "octic/norm.hpp"

namespace octic {

/// Channel rows owned by each attention head.
///
/// Standard heads own contiguous slices of C/H channels. Octic heads own
/// C/(8H) whole iso copies, i.e. the same C/(8H) rows out of each of the
/// eight sub-blocks, so every head sees complete rho_iso copies and its
/// logits are invariant. Octic layout requires 8H | C.
std::vector<std::vector<int>> head_channels(int channels, int heads, bool octic);

template <class Linear>
struct AttentionParams {
  Linear q, k, v, out;
  int heads = 1;

  void collect(const std::string& prefix, TensorList& list) {
    q.collect(join_path(prefix, "q"), list);
    k.collect(join_path(prefix, "k"), list);
    v.collect(join_path(prefix, "v"), list);
    out.collect(join_path(prefix, "out"), list);
  }
};

struct AttentionCache {
  Matrix input, q, k, v, merged;
  std::vector<Matrix> probs;  ///< per head, L x L, row i = query i
};

/// Pre-norm transformer block: x + MHA(LN(x)), then x + MLP(LN(x)).
template <class Linear, class Norm>
struct TransformerBlock {
  Norm norm1;
  AttentionParams<Linear> attn;
  Norm norm2;
  Linear fc1, fc2;

  void collect(const std::string& prefix, TensorList& list) {
    norm1.collect(join_path(prefix, "norm1"), list);
    attn.collect(join_path(prefix, "attn"), list);
    norm2.collect(join_path(prefix, "norm2"), list);
    fc1.collect(join_path(prefix, "mlp.fc1"), list);
    fc2.collect(join_path(prefix, "mlp.fc2"), list);
  }
};

using OcticBlock = TransformerBlock<EquivLinearWeights, EquivNormParams>;
using StandardBlock = TransformerBlock<DenseLinear, StdNormParams>;

OcticBlock make_octic_block(int channels, int heads, int mlp_dim, std::mt19937_64& rng);
StandardBlock make_standard_block(int channels, int heads, int mlp_dim, std::mt19937_64& rng);

/// Zero-valued parameter set with the same shapes (gradient accumulator).
OcticBlock zeros_like(const OcticBlock& block);
StandardBlock zeros_like(const StandardBlock& block);

struct BlockCache {
  Matrix input;
  NormCache norm1;
  Matrix attn_in;
  AttentionCache attn;
  Matrix mid;
  NormCache norm2;
  Matrix mlp_in;
  Matrix hidden_pre;
  Matrix act_cache;  ///< regular-domain pre-activation (octic) or hidden_pre
  Matrix hidden;
};

template <class Linear>
Matrix attention_forward(const AttentionParams<Linear>& p, const Matrix& x,
                         AttentionCache* cache = nullptr);

template <class Linear>
struct AttentionGrad {
  Matrix input;
  AttentionParams<Linear> params;
};

template <class Linear>
AttentionGrad<Linear> attention_vjp(const AttentionParams<Linear>& p, const AttentionCache& cache,
                                    const Matrix& dy);

/// Attention logits q_i^T k_j / sqrt(C/H) for each head.
template <class Linear>
std::vector<Matrix> attention_logits(const AttentionParams<Linear>& p, const Matrix& x);

template <class Linear, class Norm>
Matrix block_forward(const TransformerBlock<Linear, Norm>& b, const Matrix& x,
                     BlockCache* cache = nullptr);

template <class Linear, class Norm>
struct BlockGrad {
  Matrix input;
  TransformerBlock<Linear, Norm> params;
};

template <class Linear, class Norm>
BlockGrad<Linear, Norm> block_vjp(const TransformerBlock<Linear, Norm>& b, const BlockCache& cache,
                                  const Matrix& dy);

/// Octic multi-head attention on steerable features (no norm, no residual).
SteerableFeature mha_forward(const OcticBlock& b, const SteerableFeature& x);
SteerableFeature block_forward(const OcticBlock& b, const SteerableFeature& x);

}  // namespace octic
