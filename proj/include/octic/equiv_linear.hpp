#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "octic/params.hpp"
#include "octic/steerable.hpp"

namespace octic {

/// Block-diagonal intertwiner (C_in/8) rho_iso -> (C_out/8) rho_iso.
///
/// The A1, A2, B1, B2 sub-blocks each get their own (C_out/8 x C_in/8)
/// matrix. The E part is one (C_out/4 x C_in/4) matrix applied to the
/// stacked (E11; E21) and (E12; E22) channels, so both components of every
/// rho_E doublet share weights. Bias, when present, lives on A1 only.
struct EquivLinearWeights {
  int in_channels = 0;
  int out_channels = 0;
  std::array<Matrix, 4> one_dim;  ///< A1, A2, B1, B2
  Matrix e;
  Vector bias;  ///< C_out/8 entries, or empty

  bool has_bias() const { return bias.size() > 0; }
  std::int64_t parameter_count() const;

  static EquivLinearWeights zeros(int in_channels, int out_channels, bool with_bias);
  static EquivLinearWeights identity(int channels);
  /// Uniform(-1/sqrt(C_in), 1/sqrt(C_in)) on every block entry.
  static EquivLinearWeights random(int in_channels, int out_channels, bool with_bias,
                                   std::mt19937_64& rng);

  void collect(const std::string& prefix, TensorList& out);
};

Matrix equiv_linear_forward(const EquivLinearWeights& w, const Matrix& x);
SteerableFeature equiv_linear_forward(const EquivLinearWeights& w, const SteerableFeature& x);

struct EquivLinearGrad {
  Matrix input;
  EquivLinearWeights weights;
};

EquivLinearGrad equiv_linear_vjp(const EquivLinearWeights& w, const Matrix& x, const Matrix& dy);

/// The same map as a dense C_out x C_in matrix (bias excluded).
Matrix assemble_dense(const EquivLinearWeights& w);

/// Read the block parameters back out of a dense intertwiner. Entries off
/// the block pattern are ignored.
EquivLinearWeights extract_blocks(const Matrix& dense);

/// Multiplications per token: 4 (C_out/8)(C_in/8) + 2 (C_out/4)(C_in/4).
constexpr std::int64_t equiv_linear_macs_per_token(std::int64_t in, std::int64_t out) {
  return 4 * (out / 8) * (in / 8) + 2 * (out / 4) * (in / 4);
}

}  // namespace octic
