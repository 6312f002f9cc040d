#pragma once

#include <cstdint>
#include <random>

#include "octic/params.hpp"
#include "octic/steerable.hpp"

namespace octic {

/// Ordinary fully connected layer y = W x + b over the columns of x.
struct DenseLinear {
  Matrix w;
  Vector b;  ///< empty when the layer has no bias

  int in_channels() const { return static_cast<int>(w.cols()); }
  int out_channels() const { return static_cast<int>(w.rows()); }
  bool has_bias() const { return b.size() > 0; }
  std::int64_t parameter_count() const { return w.size() + b.size(); }

  static DenseLinear zeros(int in_channels, int out_channels, bool with_bias);
  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static DenseLinear random(int in_channels, int out_channels, bool with_bias,
                            std::mt19937_64& rng);

  void collect(const std::string& prefix, TensorList& out);
};

Matrix dense_forward(const DenseLinear& layer, const Matrix& x);

struct DenseLinearGrad {
  Matrix input;
  DenseLinear weights;
};

DenseLinearGrad dense_vjp(const DenseLinear& layer, const Matrix& x, const Matrix& dy);

}  // namespace octic
