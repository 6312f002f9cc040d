#include "octic/activation.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace octic {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
  return cdf + x * pdf;
}

Matrix gelu_forward(const Matrix& x) { return x.unaryExpr([](double v) { return gelu(v); }); }

Matrix gelu_vjp(const Matrix& x, const Matrix& dy) {
  return dy.cwiseProduct(x.unaryExpr([](double v) { return gelu_derivative(v); }));
}

namespace {

template <class Butterfly>
Matrix transform_blocks(const Matrix& x, Butterfly butterfly) {
  const int c = iso_block_size(static_cast<int>(x.rows()));
  std::array<Eigen::ArrayXXd, 8> in;
  for (int s = 0; s < 8; ++s) in[s] = x.middleRows(s * c, c).array();
  const auto out = butterfly(in);
  Matrix y(x.rows(), x.cols());
  for (int s = 0; s < 8; ++s) y.middleRows(s * c, c) = out[s].matrix();
  return y;
}

}  // namespace

Matrix iso_to_regular_blocks(const Matrix& x) {
  return transform_blocks(x, [](const auto& v) { return isotypical_to_regular_butterfly(v); });
}

Matrix regular_to_iso_blocks(const Matrix& x) {
  return transform_blocks(x, [](const auto& v) { return regular_to_isotypical_butterfly(v); });
}

Matrix equiv_gelu_forward(const Matrix& x, Matrix* regular_pre) {
  Matrix u = iso_to_regular_blocks(x);
  Matrix y = regular_to_iso_blocks(gelu_forward(u));
  if (regular_pre) *regular_pre = std::move(u);
  return y;
}

Matrix equiv_gelu_vjp(const Matrix& regular_pre, const Matrix& dy) {
  // y = Q^T g(Q x)  =>  dx = Q^T (g'(u) * (Q dy)).
  return regular_to_iso_blocks(gelu_vjp(regular_pre, iso_to_regular_blocks(dy)));
}

SteerableFeature equiv_gelu(const SteerableFeature& x) {
  if (x.rep != ChannelRep::IsoMultiple) {
    throw std::invalid_argument("equivariant GELU expects iso-multiple features");
  }
  return {equiv_gelu_forward(x.data), x.rep, x.geometry};
}

}  // namespace octic
