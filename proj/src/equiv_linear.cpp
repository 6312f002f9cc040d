#include "octic/equiv_linear.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "octic/fault.hpp"

namespace octic {

namespace {

constexpr double kUnsharedScale = 0.5;

// (E11; E21 | E12; E22): the C/4 x 2L operand of the shared E product.
Matrix gather_e(const Matrix& x, int c) {
  const Eigen::Index n = x.cols();
  Matrix out(2 * c, 2 * n);
  out.block(0, 0, c, n) = x.middleRows(4 * c, c);
  out.block(c, 0, c, n) = x.middleRows(6 * c, c);
  out.block(0, n, c, n) = x.middleRows(5 * c, c);
  out.block(c, n, c, n) = x.middleRows(7 * c, c);
  return out;
}

void scatter_e(const Matrix& e, int c, Matrix& x) {
  const Eigen::Index n = x.cols();
  x.middleRows(4 * c, c) = e.block(0, 0, c, n);
  x.middleRows(6 * c, c) = e.block(c, 0, c, n);
  x.middleRows(5 * c, c) = e.block(0, n, c, n);
  x.middleRows(7 * c, c) = e.block(c, n, c, n);
}

void check_shapes(const EquivLinearWeights& w, const Matrix& x) {
  if (x.rows() != w.in_channels) {
    throw std::invalid_argument("equivariant linear: expected " + std::to_string(w.in_channels) +
                                " input channels, got " + std::to_string(x.rows()));
  }
}

}  // namespace

std::int64_t EquivLinearWeights::parameter_count() const {
  std::int64_t n = e.size() + bias.size();
  for (const auto& m : one_dim) n += m.size();
  return n;
}

EquivLinearWeights EquivLinearWeights::zeros(int in_channels, int out_channels, bool with_bias) {
  const int ci = iso_block_size(in_channels);
  const int co = iso_block_size(out_channels);
  EquivLinearWeights w;
  w.in_channels = in_channels;
  w.out_channels = out_channels;
  for (auto& m : w.one_dim) m = Matrix::Zero(co, ci);
  w.e = Matrix::Zero(2 * co, 2 * ci);
  if (with_bias) w.bias = Vector::Zero(co);
  return w;
}

EquivLinearWeights EquivLinearWeights::identity(int channels) {
  EquivLinearWeights w = zeros(channels, channels, false);
  for (auto& m : w.one_dim) m.setIdentity();
  w.e.setIdentity();
  return w;
}

EquivLinearWeights EquivLinearWeights::random(int in_channels, int out_channels, bool with_bias,
                                              std::mt19937_64& rng) {
  EquivLinearWeights w = zeros(in_channels, out_channels, with_bias);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels));
  std::uniform_real_distribution<double> dist(-bound, bound);
  auto fill = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  };
  for (auto& m : w.one_dim) fill(m);
  fill(w.e);
  fill(w.bias);
  return w;
}

void EquivLinearWeights::collect(const std::string& prefix, TensorList& out) {
  static constexpr std::array<const char*, 4> kNames{"A1", "A2", "B1", "B2"};
  for (int i = 0; i < 4; ++i) register_tensor(out, join_path(prefix, kNames[i]), one_dim[i]);
  register_tensor(out, join_path(prefix, "E"), e);
  if (has_bias()) register_tensor(out, join_path(prefix, "bias"), bias);
}

Matrix equiv_linear_forward(const EquivLinearWeights& w, const Matrix& x) {
  check_shapes(w, x);
  const int ci = w.in_channels / 8;
  const int co = w.out_channels / 8;
  Matrix y(w.out_channels, x.cols());
  for (int b = 0; b < 4; ++b) y.middleRows(b * co, co).noalias() = w.one_dim[b] * x.middleRows(b * ci, ci);
  Matrix ye = w.e * gather_e(x, ci);
  if (active_fault() == Fault::UnsharedE) ye.rightCols(x.cols()) *= kUnsharedScale;
  scatter_e(ye, co, y);
  if (w.has_bias()) y.topRows(co).colwise() += w.bias;
  return y;
}

SteerableFeature equiv_linear_forward(const EquivLinearWeights& w, const SteerableFeature& x) {
  if (x.rep != ChannelRep::IsoMultiple) {
    throw std::invalid_argument("equivariant linear expects iso-multiple features");
  }
  return {equiv_linear_forward(w, x.data), ChannelRep::IsoMultiple, x.geometry};
}

EquivLinearGrad equiv_linear_vjp(const EquivLinearWeights& w, const Matrix& x, const Matrix& dy) {
  check_shapes(w, x);
  if (dy.rows() != w.out_channels || dy.cols() != x.cols()) {
    throw std::invalid_argument("equivariant linear vjp: cotangent shape mismatch");
  }
  const int ci = w.in_channels / 8;
  const int co = w.out_channels / 8;
  EquivLinearGrad g{Matrix(w.in_channels, x.cols()),
                    EquivLinearWeights::zeros(w.in_channels, w.out_channels, w.has_bias())};
  for (int b = 0; b < 4; ++b) {
    const auto xb = x.middleRows(b * ci, ci);
    const auto dyb = dy.middleRows(b * co, co);
    g.weights.one_dim[b].noalias() = dyb * xb.transpose();
    g.input.middleRows(b * ci, ci).noalias() = w.one_dim[b].transpose() * dyb;
  }
  const Matrix xe = gather_e(x, ci);
  const Matrix dye = gather_e(dy, co);
  g.weights.e.noalias() = dye * xe.transpose();
  const Matrix dxe = w.e.transpose() * dye;
  scatter_e(dxe, ci, g.input);
  if (w.has_bias()) g.weights.bias = dy.topRows(co).rowwise().sum();
  return g;
}

Matrix assemble_dense(const EquivLinearWeights& w) {
  const int ci = w.in_channels / 8;
  const int co = w.out_channels / 8;
  Matrix d = Matrix::Zero(w.out_channels, w.in_channels);
  for (int b = 0; b < 4; ++b) d.block(b * co, b * ci, co, ci) = w.one_dim[b];
  // Row copy a in {E1x, E2x}, column copy b, doublet component j.
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const Matrix blk = w.e.block(a * co, b * ci, co, ci);
      for (int j = 0; j < 2; ++j) {
        const double scale = j == 1 && active_fault() == Fault::UnsharedE ? kUnsharedScale : 1.0;
        d.block((4 + 2 * a + j) * co, (4 + 2 * b + j) * ci, co, ci) = scale * blk;
      }
    }
  }
  return d;
}

EquivLinearWeights extract_blocks(const Matrix& dense) {
  EquivLinearWeights w = EquivLinearWeights::zeros(static_cast<int>(dense.cols()),
                                                   static_cast<int>(dense.rows()), false);
  const int ci = w.in_channels / 8;
  const int co = w.out_channels / 8;
  for (int b = 0; b < 4; ++b) w.one_dim[b] = dense.block(b * co, b * ci, co, ci);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      w.e.block(a * co, b * ci, co, ci) = dense.block((4 + 2 * a) * co, (4 + 2 * b) * ci, co, ci);
    }
  }
  return w;
}

}  // namespace octic
