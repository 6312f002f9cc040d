#pragma once

#include <array>

#include "octic/params.hpp"
#include "octic/steerable.hpp"

namespace octic {

inline constexpr double kNormEpsilon = 1e-6;

/// Gain slot used by each iso sub-block: A1, A2, B1, B2 get their own, the
/// two components of each E doublet share one (E1 = E11/E12, E2 = E21/E22).
inline constexpr std::array<int, 8> kNormGainSlot{0, 1, 2, 3, 4, 4, 5, 5};
inline constexpr int kEquivNormGains = 6;

/// Equivariant layer norm: per token, centre each sub-block on its own mean,
/// divide by the RMS of the whole centred token, scale by per-block gains.
struct EquivNormParams {
  Vector gains = Vector::Ones(kEquivNormGains);

  void collect(const std::string& prefix, TensorList& out);
};

/// Standard layer norm with per-channel affine parameters.
struct StdNormParams {
  Vector gamma;
  Vector beta;

  static StdNormParams identity(int channels);
  void collect(const std::string& prefix, TensorList& out);
};

struct NormCache {
  Matrix normalized;  ///< centred and RMS-scaled, before the affine part
  Eigen::RowVectorXd inv_rms;
};

Matrix norm_forward(const EquivNormParams& p, const Matrix& x, NormCache* cache = nullptr);
Matrix norm_forward(const StdNormParams& p, const Matrix& x, NormCache* cache = nullptr);

SteerableFeature equiv_layernorm(const SteerableFeature& x, const EquivNormParams& p);

struct EquivNormGrad {
  Matrix input;
  EquivNormParams params;
};

struct StdNormGrad {
  Matrix input;
  StdNormParams params;
};

EquivNormGrad norm_vjp(const EquivNormParams& p, const NormCache& cache, const Matrix& dy);
StdNormGrad norm_vjp(const StdNormParams& p, const NormCache& cache, const Matrix& dy);

}  // namespace octic
