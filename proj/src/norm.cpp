#include "octic/norm.hpp"

#include <cmath>
#include <stdexcept>

namespace octic {

namespace {

// Subtract the mean of each of `blocks` equal row blocks, per column.
Matrix center_blocks(const Matrix& x, int blocks) {
  const Eigen::Index rows = x.rows() / blocks;
  Matrix out(x.rows(), x.cols());
  for (int b = 0; b < blocks; ++b) {
    const auto xb = x.middleRows(b * rows, rows);
    out.middleRows(b * rows, rows) = xb.rowwise() - xb.colwise().mean();
  }
  return out;
}

Matrix normalize(const Matrix& x, int blocks, NormCache& cache) {
  const Matrix centred = center_blocks(x, blocks);
  const double channels = static_cast<double>(x.rows());
  cache.inv_rms =
      ((centred.colwise().squaredNorm() / channels).array() + kNormEpsilon).rsqrt().matrix();
  cache.normalized = centred * cache.inv_rms.asDiagonal();
  return cache.normalized;
}

// Back through n = P x / rms(P x), P the block-centring projector.
Matrix normalize_vjp(const NormCache& cache, const Matrix& dn, int blocks) {
  const double channels = static_cast<double>(dn.rows());
  const Eigen::RowVectorXd proj = (cache.normalized.cwiseProduct(dn)).colwise().sum() / channels;
  const Matrix dc = (dn - cache.normalized * proj.asDiagonal()) * cache.inv_rms.asDiagonal();
  return center_blocks(dc, blocks);
}

}  // namespace

void EquivNormParams::collect(const std::string& prefix, TensorList& out) {
  register_tensor(out, join_path(prefix, "gains"), gains);
}

StdNormParams StdNormParams::identity(int channels) {
  return {Vector::Ones(channels), Vector::Zero(channels)};
}

void StdNormParams::collect(const std::string& prefix, TensorList& out) {
  register_tensor(out, join_path(prefix, "gamma"), gamma);
  register_tensor(out, join_path(prefix, "beta"), beta);
}

Matrix norm_forward(const EquivNormParams& p, const Matrix& x, NormCache* cache) {
  const int c = iso_block_size(static_cast<int>(x.rows()));
  NormCache local;
  NormCache& nc = cache ? *cache : local;
  Matrix y = normalize(x, 8, nc);
  for (int b = 0; b < 8; ++b) y.middleRows(b * c, c) *= p.gains[kNormGainSlot[b]];
  return y;
}

Matrix norm_forward(const StdNormParams& p, const Matrix& x, NormCache* cache) {
  if (p.gamma.size() != x.rows()) throw std::invalid_argument("layer norm: channel mismatch");
  NormCache local;
  NormCache& nc = cache ? *cache : local;
  Matrix y = p.gamma.asDiagonal() * normalize(x, 1, nc);
  y.colwise() += p.beta;
  return y;
}

SteerableFeature equiv_layernorm(const SteerableFeature& x, const EquivNormParams& p) {
  if (x.rep != ChannelRep::IsoMultiple) {
    throw std::invalid_argument("equivariant layer norm expects iso-multiple features");
  }
  return {norm_forward(p, x.data), x.rep, x.geometry};
}

EquivNormGrad norm_vjp(const EquivNormParams& p, const NormCache& cache, const Matrix& dy) {
  const int c = iso_block_size(static_cast<int>(dy.rows()));
  EquivNormGrad g;
  g.params.gains = Vector::Zero(kEquivNormGains);
  Matrix dn(dy.rows(), dy.cols());
  for (int b = 0; b < 8; ++b) {
    const int slot = kNormGainSlot[b];
    g.params.gains[slot] += cache.normalized.middleRows(b * c, c).cwiseProduct(dy.middleRows(b * c, c)).sum();
    dn.middleRows(b * c, c) = p.gains[slot] * dy.middleRows(b * c, c);
  }
  g.input = normalize_vjp(cache, dn, 8);
  return g;
}

StdNormGrad norm_vjp(const StdNormParams& p, const NormCache& cache, const Matrix& dy) {
  StdNormGrad g;
  g.params.gamma = cache.normalized.cwiseProduct(dy).rowwise().sum();
  g.params.beta = dy.rowwise().sum();
  g.input = normalize_vjp(cache, p.gamma.asDiagonal() * dy, 1);
  return g;
}

}  // namespace octic
