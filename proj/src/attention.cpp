#include "octic/attention.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "octic/activation.hpp"

namespace octic {

namespace {

template <class Linear>
constexpr bool kOctic = std::is_same_v<Linear, EquivLinearWeights>;

Matrix linear(const EquivLinearWeights& w, const Matrix& x) { return equiv_linear_forward(w, x); }
Matrix linear(const DenseLinear& w, const Matrix& x) { return dense_forward(w, x); }

EquivLinearGrad linear_vjp(const EquivLinearWeights& w, const Matrix& x, const Matrix& dy) {
  return equiv_linear_vjp(w, x, dy);
}
DenseLinearGrad linear_vjp(const DenseLinear& w, const Matrix& x, const Matrix& dy) {
  return dense_vjp(w, x, dy);
}

int linear_out(const EquivLinearWeights& w) { return w.out_channels; }
int linear_out(const DenseLinear& w) { return w.out_channels(); }

void softmax_rows(Matrix& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    auto row = s.row(i);
    row = (row.array() - row.maxCoeff()).exp().matrix();
    row /= row.sum();
  }
}

}  // namespace

std::vector<std::vector<int>> head_channels(int channels, int heads, bool octic) {
  if (heads < 1) throw std::invalid_argument("attention needs at least one head");
  const int unit = octic ? 8 * heads : heads;
  if (channels % unit != 0) {
    throw std::invalid_argument("channel count " + std::to_string(channels) +
                                (octic ? " is not divisible by 8 * heads = " : " is not divisible by heads = ") +
                                std::to_string(unit));
  }
  std::vector<std::vector<int>> rows(heads);
  if (octic) {
    const int c = channels / 8;
    const int per_head = c / heads;
    for (int h = 0; h < heads; ++h) {
      for (int s = 0; s < 8; ++s) {
        for (int j = 0; j < per_head; ++j) rows[h].push_back(s * c + h * per_head + j);
      }
    }
  } else {
    const int per_head = channels / heads;
    for (int h = 0; h < heads; ++h) {
      for (int j = 0; j < per_head; ++j) rows[h].push_back(h * per_head + j);
    }
  }
  return rows;
}

OcticBlock make_octic_block(int channels, int heads, int mlp_dim, std::mt19937_64& rng) {
  head_channels(channels, heads, true);
  OcticBlock b;
  b.attn.heads = heads;
  b.attn.q = EquivLinearWeights::random(channels, channels, true, rng);
  b.attn.k = EquivLinearWeights::random(channels, channels, true, rng);
  b.attn.v = EquivLinearWeights::random(channels, channels, true, rng);
  b.attn.out = EquivLinearWeights::random(channels, channels, true, rng);
  b.fc1 = EquivLinearWeights::random(channels, mlp_dim, true, rng);
  b.fc2 = EquivLinearWeights::random(mlp_dim, channels, true, rng);
  return b;
}

StandardBlock make_standard_block(int channels, int heads, int mlp_dim, std::mt19937_64& rng) {
  head_channels(channels, heads, false);
  StandardBlock b;
  b.norm1 = StdNormParams::identity(channels);
  b.norm2 = StdNormParams::identity(channels);
  b.attn.heads = heads;
  b.attn.q = DenseLinear::random(channels, channels, true, rng);
  b.attn.k = DenseLinear::random(channels, channels, true, rng);
  b.attn.v = DenseLinear::random(channels, channels, true, rng);
  b.attn.out = DenseLinear::random(channels, channels, true, rng);
  b.fc1 = DenseLinear::random(channels, mlp_dim, true, rng);
  b.fc2 = DenseLinear::random(mlp_dim, channels, true, rng);
  return b;
}

namespace {

EquivLinearWeights zero_of(const EquivLinearWeights& w) {
  return EquivLinearWeights::zeros(w.in_channels, w.out_channels, w.has_bias());
}
DenseLinear zero_of(const DenseLinear& w) {
  return DenseLinear::zeros(w.in_channels(), w.out_channels(), w.has_bias());
}

}  // namespace

OcticBlock zeros_like(const OcticBlock& block) {
  OcticBlock z;
  z.norm1.gains.setZero();
  z.norm2.gains.setZero();
  z.attn.heads = block.attn.heads;
  z.attn.q = zero_of(block.attn.q);
  z.attn.k = zero_of(block.attn.k);
  z.attn.v = zero_of(block.attn.v);
  z.attn.out = zero_of(block.attn.out);
  z.fc1 = zero_of(block.fc1);
  z.fc2 = zero_of(block.fc2);
  return z;
}

StandardBlock zeros_like(const StandardBlock& block) {
  StandardBlock z;
  z.norm1 = {Vector::Zero(block.norm1.gamma.size()), Vector::Zero(block.norm1.beta.size())};
  z.norm2 = {Vector::Zero(block.norm2.gamma.size()), Vector::Zero(block.norm2.beta.size())};
  z.attn.heads = block.attn.heads;
  z.attn.q = zero_of(block.attn.q);
  z.attn.k = zero_of(block.attn.k);
  z.attn.v = zero_of(block.attn.v);
  z.attn.out = zero_of(block.attn.out);
  z.fc1 = zero_of(block.fc1);
  z.fc2 = zero_of(block.fc2);
  return z;
}

template <class Linear>
std::vector<Matrix> attention_logits(const AttentionParams<Linear>& p, const Matrix& x) {
  const Matrix q = linear(p.q, x);
  const Matrix k = linear(p.k, x);
  const int channels = static_cast<int>(q.rows());
  const double scale = 1.0 / std::sqrt(static_cast<double>(channels) / p.heads);
  std::vector<Matrix> out;
  for (const auto& rows : head_channels(channels, p.heads, kOctic<Linear>)) {
    out.push_back(scale * q(rows, Eigen::all).transpose() * k(rows, Eigen::all));
  }
  return out;
}

template <class Linear>
Matrix attention_forward(const AttentionParams<Linear>& p, const Matrix& x, AttentionCache* cache) {
  AttentionCache local;
  AttentionCache& c = cache ? *cache : local;
  c.input = x;
  c.q = linear(p.q, x);
  c.k = linear(p.k, x);
  c.v = linear(p.v, x);
  const int channels = linear_out(p.q);
  const double scale = 1.0 / std::sqrt(static_cast<double>(channels) / p.heads);
  c.merged = Matrix::Zero(channels, x.cols());
  c.probs.clear();
  using Eigen::all;
  for (const auto& rows : head_channels(channels, p.heads, kOctic<Linear>)) {
    Matrix s = scale * c.q(rows, all).transpose() * c.k(rows, all);
    softmax_rows(s);
    c.merged(rows, all) = c.v(rows, all) * s.transpose();
    c.probs.push_back(std::move(s));
  }
  return linear(p.out, c.merged);
}

template <class Linear>
AttentionGrad<Linear> attention_vjp(const AttentionParams<Linear>& p, const AttentionCache& c,
                                    const Matrix& dy) {
  using Eigen::all;
  AttentionGrad<Linear> g;
  g.params.heads = p.heads;
  auto out_grad = linear_vjp(p.out, c.merged, dy);
  g.params.out = std::move(out_grad.weights);
  const Matrix& dmerged = out_grad.input;

  const int channels = static_cast<int>(c.q.rows());
  const double scale = 1.0 / std::sqrt(static_cast<double>(channels) / p.heads);
  Matrix dq = Matrix::Zero(c.q.rows(), c.q.cols());
  Matrix dk = Matrix::Zero(c.k.rows(), c.k.cols());
  Matrix dv = Matrix::Zero(c.v.rows(), c.v.cols());
  const auto heads = head_channels(channels, p.heads, kOctic<Linear>);
  for (std::size_t h = 0; h < heads.size(); ++h) {
    const auto& rows = heads[h];
    const Matrix& a = c.probs[h];
    const Matrix dout = dmerged(rows, all);
    dv(rows, all) = dout * a;
    const Matrix da = dout.transpose() * c.v(rows, all);
    const Eigen::VectorXd rowdot = da.cwiseProduct(a).rowwise().sum();
    const Matrix ds = a.cwiseProduct(da.colwise() - rowdot);
    dq(rows, all) = scale * c.k(rows, all) * ds.transpose();
    dk(rows, all) = scale * c.q(rows, all) * ds;
  }
  auto gq = linear_vjp(p.q, c.input, dq);
  auto gk = linear_vjp(p.k, c.input, dk);
  auto gv = linear_vjp(p.v, c.input, dv);
  g.params.q = std::move(gq.weights);
  g.params.k = std::move(gk.weights);
  g.params.v = std::move(gv.weights);
  g.input = gq.input + gk.input + gv.input;
  return g;
}

template <class Linear, class Norm>
Matrix block_forward(const TransformerBlock<Linear, Norm>& b, const Matrix& x, BlockCache* cache) {
  BlockCache local;
  BlockCache& c = cache ? *cache : local;
  c.input = x;
  c.attn_in = norm_forward(b.norm1, x, &c.norm1);
  c.mid = x + attention_forward(b.attn, c.attn_in, &c.attn);
  c.mlp_in = norm_forward(b.norm2, c.mid, &c.norm2);
  c.hidden_pre = linear(b.fc1, c.mlp_in);
  if constexpr (kOctic<Linear>) {
    c.hidden = equiv_gelu_forward(c.hidden_pre, &c.act_cache);
  } else {
    c.act_cache = c.hidden_pre;
    c.hidden = gelu_forward(c.hidden_pre);
  }
  return c.mid + linear(b.fc2, c.hidden);
}

template <class Linear, class Norm>
BlockGrad<Linear, Norm> block_vjp(const TransformerBlock<Linear, Norm>& b, const BlockCache& c,
                                  const Matrix& dy) {
  BlockGrad<Linear, Norm> g;
  auto g2 = linear_vjp(b.fc2, c.hidden, dy);
  g.params.fc2 = std::move(g2.weights);
  Matrix dpre;
  if constexpr (kOctic<Linear>) {
    dpre = equiv_gelu_vjp(c.act_cache, g2.input);
  } else {
    dpre = gelu_vjp(c.act_cache, g2.input);
  }
  auto g1 = linear_vjp(b.fc1, c.mlp_in, dpre);
  g.params.fc1 = std::move(g1.weights);
  auto gn2 = norm_vjp(b.norm2, c.norm2, g1.input);
  g.params.norm2 = std::move(gn2.params);
  const Matrix dmid = dy + gn2.input;

  auto ga = attention_vjp(b.attn, c.attn, dmid);
  g.params.attn = std::move(ga.params);
  auto gn1 = norm_vjp(b.norm1, c.norm1, ga.input);
  g.params.norm1 = std::move(gn1.params);
  g.input = dmid + gn1.input;
  return g;
}

SteerableFeature mha_forward(const OcticBlock& b, const SteerableFeature& x) {
  if (x.rep != ChannelRep::IsoMultiple) throw std::invalid_argument("octic MHA expects iso features");
  return {attention_forward(b.attn, x.data), x.rep, x.geometry};
}

SteerableFeature block_forward(const OcticBlock& b, const SteerableFeature& x) {
  if (x.rep != ChannelRep::IsoMultiple) throw std::invalid_argument("octic block expects iso features");
  return {block_forward(b, x.data), x.rep, x.geometry};
}

template std::vector<Matrix> attention_logits(const AttentionParams<EquivLinearWeights>&, const Matrix&);
template std::vector<Matrix> attention_logits(const AttentionParams<DenseLinear>&, const Matrix&);
template Matrix attention_forward(const AttentionParams<EquivLinearWeights>&, const Matrix&, AttentionCache*);
template Matrix attention_forward(const AttentionParams<DenseLinear>&, const Matrix&, AttentionCache*);
template AttentionGrad<EquivLinearWeights> attention_vjp(const AttentionParams<EquivLinearWeights>&,
                                                         const AttentionCache&, const Matrix&);
template AttentionGrad<DenseLinear> attention_vjp(const AttentionParams<DenseLinear>&,
                                                  const AttentionCache&, const Matrix&);
template Matrix block_forward(const OcticBlock&, const Matrix&, BlockCache*);
template Matrix block_forward(const StandardBlock&, const Matrix&, BlockCache*);
template BlockGrad<EquivLinearWeights, EquivNormParams> block_vjp(const OcticBlock&, const BlockCache&,
                                                                  const Matrix&);
template BlockGrad<DenseLinear, StdNormParams> block_vjp(const StandardBlock&, const BlockCache&,
                                                         const Matrix&);

}  // namespace octic
