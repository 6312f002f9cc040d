#include "octic/dense.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace octic {

DenseLinear DenseLinear::zeros(int in_channels, int out_channels, bool with_bias) {
  DenseLinear layer;
  layer.w = Matrix::Zero(out_channels, in_channels);
  if (with_bias) layer.b = Vector::Zero(out_channels);
  return layer;
}

DenseLinear DenseLinear::random(int in_channels, int out_channels, bool with_bias,
                                std::mt19937_64& rng) {
  DenseLinear layer = zeros(in_channels, out_channels, with_bias);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < layer.w.size(); ++i) layer.w.data()[i] = dist(rng);
  for (Eigen::Index i = 0; i < layer.b.size(); ++i) layer.b[i] = dist(rng);
  return layer;
}

void DenseLinear::collect(const std::string& prefix, TensorList& out) {
  register_tensor(out, join_path(prefix, "weight"), w);
  if (has_bias()) register_tensor(out, join_path(prefix, "bias"), b);
}

Matrix dense_forward(const DenseLinear& layer, const Matrix& x) {
  if (x.rows() != layer.w.cols()) {
    throw std::invalid_argument("dense linear: expected " + std::to_string(layer.w.cols()) +
                                " input channels, got " + std::to_string(x.rows()));
  }
  Matrix y = layer.w * x;
  if (layer.has_bias()) y.colwise() += layer.b;
  return y;
}

DenseLinearGrad dense_vjp(const DenseLinear& layer, const Matrix& x, const Matrix& dy) {
  if (dy.rows() != layer.w.rows() || dy.cols() != x.cols() || x.rows() != layer.w.cols()) {
    throw std::invalid_argument("dense linear vjp: shape mismatch");
  }
  DenseLinearGrad g;
  g.input.noalias() = layer.w.transpose() * dy;
  g.weights.w.noalias() = dy * x.transpose();
  if (layer.has_bias()) g.weights.b = dy.rowwise().sum();
  return g;
}

}  // namespace octic
