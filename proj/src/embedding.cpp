#include "octic/embedding.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace octic {

PatchEmbedWeights PatchEmbedWeights::zeros(int channels, int patch, bool octic) {
  if (patch < 1) throw std::invalid_argument("patch size must be positive");
  PatchEmbedWeights p;
  p.patch = patch;
  p.octic = octic;
  p.w = Matrix::Zero(channels, 3 * patch * patch);
  p.bias = Vector::Zero(octic ? iso_block_size(channels) : channels);
  return p;
}

PatchEmbedWeights PatchEmbedWeights::random(int channels, int patch, bool octic, std::mt19937_64& rng) {
  PatchEmbedWeights p = zeros(channels, patch, octic);
  const double bound = 1.0 / std::sqrt(3.0 * patch * patch);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < p.w.size(); ++i) p.w.data()[i] = dist(rng);
  for (Eigen::Index i = 0; i < p.bias.size(); ++i) p.bias[i] = dist(rng);
  p.project();
  return p;
}

void PatchEmbedWeights::project() {
  if (!octic) return;
  w = reynolds_project_intertwiner(w, Representation::patch(patch),
                                   Representation::iso_multiple(iso_block_size(channels())));
}

void PatchEmbedWeights::collect(const std::string& prefix, TensorList& out) {
  register_tensor(out, join_path(prefix, "weight"), w);
  register_tensor(out, join_path(prefix, "bias"), bias);
}

double patch_kernel_violation(const Matrix& w, int patch) {
  const auto in = Representation::patch(patch);
  const auto out = Representation::iso_multiple(iso_block_size(static_cast<int>(w.rows())));
  double worst = 0.0;
  for (auto g : all_elements()) {
    const Matrix lhs = in.act(inverse(g), w.transpose()).transpose();  // W rho_patch(g)
    const Matrix rhs = out.act(g, w);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

Matrix patch_embed_forward(const PatchEmbedWeights& w, const Matrix& patches) {
  if (patches.rows() != w.w.cols()) {
    throw std::invalid_argument("patch embed: expected " + std::to_string(w.w.cols()) +
                                " patch values, got " + std::to_string(patches.rows()));
  }
  Matrix y = w.w * patches;
  y.topRows(w.bias.size()).colwise() += w.bias;
  return y;
}

SteerableFeature patch_embed(const PatchEmbedWeights& w, const Image& image) {
  const Matrix patches = patchify(image, w.patch);
  return {patch_embed_forward(w, patches), w.octic ? ChannelRep::IsoMultiple : ChannelRep::None,
          GridGeometry{image.size / w.patch, false}};
}

PatchEmbedWeights patch_embed_vjp(const PatchEmbedWeights& w, const Matrix& patches, const Matrix& dy) {
  PatchEmbedWeights g = PatchEmbedWeights::zeros(w.channels(), w.patch, w.octic);
  g.w.noalias() = dy * patches.transpose();
  g.bias = dy.topRows(w.bias.size()).rowwise().sum();
  return g;
}

Vector project_cls(const Vector& cls) {
  Vector out = Vector::Zero(cls.size());
  const int c = iso_block_size(static_cast<int>(cls.size()));
  out.head(c) = cls.head(c);
  return out;
}

Matrix add_posenc_and_cls(const Matrix& x, const Matrix& e, const Vector& cls, bool octic) {
  if (e.rows() != x.rows() || e.cols() != x.cols() || cls.size() != x.rows()) {
    throw std::invalid_argument("positional encoding or class token shape mismatch");
  }
  if (octic) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(x.cols()))));
    if (side * side != x.cols()) throw std::invalid_argument("token count is not a square grid");
    const double pe = posenc_constraint_violation(e, GridGeometry{side, false});
    if (pe > kConstraintTolerance) {
      throw std::invalid_argument("positional encoding violates the equivariance constraint by " +
                                  std::to_string(pe));
    }
    const double ce = (cls - project_cls(cls)).cwiseAbs().maxCoeff();
    if (ce > kConstraintTolerance) {
      throw std::invalid_argument("class token has non-A1 components of size " + std::to_string(ce));
    }
  }
  Matrix out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x + e;
  out.col(x.cols()) = cls;
  return out;
}

SteerableFeature add_posenc_and_cls(const SteerableFeature& x, const Matrix& e, const Vector& cls) {
  if (x.geometry.has_cls) throw std::invalid_argument("feature already carries a class token");
  const bool octic = x.rep == ChannelRep::IsoMultiple;
  return {add_posenc_and_cls(x.data, e, cls, octic), x.rep, GridGeometry{x.geometry.side, true}};
}

}  // namespace octic
