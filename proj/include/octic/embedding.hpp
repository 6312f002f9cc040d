#pragma once

#include <random>

#include "octic/params.hpp"
#include "octic/steerable.hpp"

namespace octic {

/// Patch embedding: a C x 3P^2 kernel applied to every non-overlapping P x P
/// patch (a stride-P convolution). In octic mode the kernel is kept on the
/// intertwiner subspace rho_patch -> (C/8) rho_iso and the bias covers the
/// A1 rows only.
struct PatchEmbedWeights {
  Matrix w;
  Vector bias;
  int patch = 1;
  bool octic = true;

  int channels() const { return static_cast<int>(w.rows()); }

  static PatchEmbedWeights zeros(int channels, int patch, bool octic);
  /// Uniform(-1/sqrt(3P^2), 1/sqrt(3P^2)), then projected in octic mode.
  static PatchEmbedWeights random(int channels, int patch, bool octic, std::mt19937_64& rng);

  /// Reynolds projection of the kernel and bias layout; no-op for standard.
  void project();
  void collect(const std::string& prefix, TensorList& out);
};

/// max_g |W rho_patch(g) - rho_chan(g) W|.
double patch_kernel_violation(const Matrix& w, int patch);

/// Kernel applied to a 3P^2 x N^2 patch matrix.
Matrix patch_embed_forward(const PatchEmbedWeights& w, const Matrix& patches);
SteerableFeature patch_embed(const PatchEmbedWeights& w, const Image& image);

/// Parameter gradient (the image is not differentiated).
PatchEmbedWeights patch_embed_vjp(const PatchEmbedWeights& w, const Matrix& patches,
                                  const Matrix& dy);

inline constexpr double kConstraintTolerance = 1e-10;

/// x + e on the grid tokens, then the class token appended as the last
/// column. With `octic` set, e must satisfy the positional-encoding
/// fixed-point constraint and cls must be zero outside the A1 block;
/// otherwise std::invalid_argument is thrown.
Matrix add_posenc_and_cls(const Matrix& x, const Matrix& e, const Vector& cls, bool octic);
SteerableFeature add_posenc_and_cls(const SteerableFeature& x, const Matrix& e, const Vector& cls);

/// Zero the non-A1 entries of a class token.
Vector project_cls(const Vector& cls);

}  // namespace octic
