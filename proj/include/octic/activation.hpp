#pragma once

#include "octic/steerable.hpp"

namespace octic {

/// Exact GELU, x * Phi(x).
double gelu(double x);
double gelu_derivative(double x);

Matrix gelu_forward(const Matrix& x);
Matrix gelu_vjp(const Matrix& x, const Matrix& dy);

/// Fourier transforms applied to every iso copy of a (C/8) rho_iso feature.
/// Copy j is the 8-tuple of rows {j, c + j, ..., 7c + j}, c = C/8; on the
/// regular side row s*c + j holds slot s of copy j.
Matrix iso_to_regular_blocks(const Matrix& x);
Matrix regular_to_iso_blocks(const Matrix& x);

/// GELU applied pointwise in the regular domain: Q^T gelu(Q x) per copy.
/// If `regular_pre` is given it receives Q x for the backward pass.
Matrix equiv_gelu_forward(const Matrix& x, Matrix* regular_pre = nullptr);
Matrix equiv_gelu_vjp(const Matrix& regular_pre, const Matrix& dy);

SteerableFeature equiv_gelu(const SteerableFeature& x);

}  // namespace octic
