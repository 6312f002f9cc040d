#include "octic/steerable.hpp"

#include <stdexcept>
#include <string>

namespace octic {

std::string_view iso_component_name(int component) {
  static constexpr std::array<std::string_view, 8> kNames{"A1",  "A2",  "B1",  "B2",
                                                          "E11", "E12", "E21", "E22"};
  return kNames.at(component);
}

int iso_block_size(int channels) {
  if (channels <= 0 || channels % 8 != 0) {
    throw std::invalid_argument("iso-multiple features need a channel count divisible by 8, got " +
                                std::to_string(channels));
  }
  return channels / 8;
}

IndexPermutation grid_permutation(GroupElement g, int side) {
  if (side < 1) throw std::invalid_argument("grid side must be positive");
  IndexPermutation perm(static_cast<std::size_t>(side) * side);
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      int row = i;
      int col = j;
      for (int k = 0; k < g.rotations(); ++k) {
        const int next_row = side - 1 - col;
        col = row;
        row = next_row;
      }
      if (g.is_reflection()) col = side - 1 - col;
      perm[i * side + j] = row * side + col;
    }
  }
  return perm;
}

IndexPermutation token_permutation(GroupElement g, const GridGeometry& geometry) {
  IndexPermutation perm = grid_permutation(g, geometry.side);
  if (geometry.has_cls) perm.push_back(geometry.grid_tokens());
  return perm;
}

IndexPermutation patch_permutation(GroupElement g, int patch) {
  if (patch < 1) throw std::invalid_argument("patch size must be positive");
  const IndexPermutation plane = grid_permutation(g, patch);
  const int area = patch * patch;
  IndexPermutation perm(3 * area);
  for (int c = 0; c < 3; ++c) {
    for (int p = 0; p < area; ++p) perm[c * area + p] = c * area + plane[p];
  }
  return perm;
}

Image transform_image(GroupElement g, const Image& image) {
  const IndexPermutation plane = grid_permutation(g, image.size);
  const int area = image.size * image.size;
  Image out(image.size);
  for (int c = 0; c < 3; ++c) {
    for (int p = 0; p < area; ++p) out.pixels[c * area + plane[p]] = image.pixels[c * area + p];
  }
  return out;
}

Matrix patchify(const Image& image, int patch) {
  if (patch < 1 || image.size % patch != 0) {
    throw std::invalid_argument("image size " + std::to_string(image.size) +
                                " is not divisible by patch size " + std::to_string(patch));
  }
  const int side = image.size / patch;
  Matrix out(3 * patch * patch, side * side);
  for (int tr = 0; tr < side; ++tr) {
    for (int tc = 0; tc < side; ++tc) {
      const int token = tr * side + tc;
      int k = 0;
      for (int c = 0; c < 3; ++c) {
        for (int a = 0; a < patch; ++a) {
          for (int b = 0; b < patch; ++b) out(k++, token) = image.at(c, tr * patch + a, tc * patch + b);
        }
      }
    }
  }
  return out;
}

Matrix permute_rows(const Matrix& in, const IndexPermutation& perm) {
  if (static_cast<Eigen::Index>(perm.size()) != in.rows()) {
    throw std::invalid_argument("row permutation size mismatch");
  }
  Matrix out(in.rows(), in.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) out.row(perm[i]) = in.row(static_cast<Eigen::Index>(i));
  return out;
}

Matrix permute_cols(const Matrix& in, const IndexPermutation& perm) {
  if (static_cast<Eigen::Index>(perm.size()) != in.cols()) {
    throw std::invalid_argument("column permutation size mismatch");
  }
  Matrix out(in.rows(), in.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) out.col(perm[i]) = in.col(static_cast<Eigen::Index>(i));
  return out;
}

Matrix apply_iso_action(GroupElement g, const Matrix& x) {
  const int c = iso_block_size(static_cast<int>(x.rows()));
  Matrix y(x.rows(), x.cols());
  y.middleRows(0, c) = x.middleRows(0, c);
  y.middleRows(c, c) = character(Irrep::A2, g) * x.middleRows(c, c);
  y.middleRows(2 * c, c) = character(Irrep::B1, g) * x.middleRows(2 * c, c);
  y.middleRows(3 * c, c) = character(Irrep::B2, g) * x.middleRows(3 * c, c);
  const Eigen::Matrix2d m = e_matrix(g);
  for (int copy = 0; copy < 2; ++copy) {
    const int first = (4 + 2 * copy) * c;
    const int second = first + c;
    y.middleRows(first, c) = m(0, 0) * x.middleRows(first, c) + m(0, 1) * x.middleRows(second, c);
    y.middleRows(second, c) = m(1, 0) * x.middleRows(first, c) + m(1, 1) * x.middleRows(second, c);
  }
  return y;
}

SteerableFeature apply_channel_action(GroupElement g, const SteerableFeature& x) {
  switch (x.rep) {
    case ChannelRep::IsoMultiple: return {apply_iso_action(g, x.data), x.rep, x.geometry};
    case ChannelRep::A1Multiple: return x;
    case ChannelRep::None: break;
  }
  throw std::invalid_argument("feature has no channel representation");
}

SteerableFeature act(GroupElement g, const SteerableFeature& x) {
  if (x.tokens() != x.geometry.tokens()) {
    throw std::invalid_argument("feature token count does not match its grid geometry");
  }
  Matrix chan = x.rep == ChannelRep::IsoMultiple ? apply_iso_action(g, x.data) : x.data;
  if (x.rep == ChannelRep::None) {
    throw std::invalid_argument("feature has no channel representation");
  }
  return {permute_cols(chan, token_permutation(g, x.geometry)), x.rep, x.geometry};
}

Representation Representation::iso_multiple(int copies) {
  Representation rep;
  rep.kind_ = ChannelRep::IsoMultiple;
  rep.dim_ = 8 * copies;
  return rep;
}

Representation Representation::a1_multiple(int dim) {
  Representation rep;
  rep.kind_ = ChannelRep::A1Multiple;
  rep.dim_ = dim;
  return rep;
}

Representation Representation::permutation(std::array<IndexPermutation, kGroupOrder> perms) {
  Representation rep;
  rep.kind_ = ChannelRep::None;
  rep.dim_ = static_cast<int>(perms[0].size());
  rep.perms_ = std::move(perms);
  return rep;
}

Representation Representation::patch(int patch_size) {
  std::array<IndexPermutation, kGroupOrder> perms;
  for (auto g : all_elements()) perms[g.index()] = patch_permutation(g, patch_size);
  return permutation(std::move(perms));
}

Representation Representation::tokens(const GridGeometry& geometry) {
  std::array<IndexPermutation, kGroupOrder> perms;
  for (auto g : all_elements()) perms[g.index()] = token_permutation(g, geometry);
  return permutation(std::move(perms));
}

Matrix Representation::act(GroupElement g, const Matrix& x) const {
  if (x.rows() != dim_) throw std::invalid_argument("representation dimension mismatch");
  switch (kind_) {
    case ChannelRep::IsoMultiple: return apply_iso_action(g, x);
    case ChannelRep::A1Multiple: return x;
    case ChannelRep::None: return permute_rows(x, perms_[g.index()]);
  }
  return x;
}

Matrix Representation::matrix(GroupElement g) const {
  return act(g, Matrix::Identity(dim_, dim_));
}

Matrix reynolds_project_intertwiner(const Matrix& w, const Representation& in,
                                    const Representation& out) {
  if (w.rows() != out.dim() || w.cols() != in.dim()) {
    throw std::invalid_argument("intertwiner shape does not match the representations");
  }
  // rho_out(g)^T W rho_in(g) = rho_out(g^-1) (rho_in(g^-1) W^T)^T
  const Matrix wt = w.transpose();
  Matrix acc = Matrix::Zero(w.rows(), w.cols());
  for (auto g : all_elements()) {
    const GroupElement gi = inverse(g);
    acc += out.act(gi, in.act(gi, wt).transpose());
  }
  return acc / kGroupOrder;
}

Matrix reynolds_project_posenc(const Matrix& e, const GridGeometry& geometry) {
  if (e.cols() != geometry.grid_tokens()) {
    throw std::invalid_argument("positional encoding must have one column per grid token");
  }
  const GridGeometry grid{geometry.side, false};
  Matrix acc = Matrix::Zero(e.rows(), e.cols());
  for (auto g : all_elements()) {
    acc += permute_cols(apply_iso_action(g, e), token_permutation(g, grid));
  }
  return acc / kGroupOrder;
}

double posenc_constraint_violation(const Matrix& e, const GridGeometry& geometry) {
  const GridGeometry grid{geometry.side, false};
  double worst = 0.0;
  for (auto g : all_elements()) {
    const Matrix moved = permute_cols(apply_iso_action(g, e), token_permutation(g, grid));
    worst = std::max(worst, (moved - e).cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {

double relative_gap(const Matrix& a, const Matrix& b, double scale) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("equivariance residual: output shapes differ across g");
  }
  return (a - b).cwiseAbs().maxCoeff() / (scale + kResidualEpsilon);
}

}  // namespace

std::array<double, kGroupOrder> equivariance_residuals(const FeatureMap& f,
                                                       const SteerableFeature& x) {
  const SteerableFeature fx = f(x);
  const double scale = fx.data.size() ? fx.data.cwiseAbs().maxCoeff() : 0.0;
  std::array<double, kGroupOrder> out{};
  for (auto g : all_elements()) {
    out[g.index()] = relative_gap(f(act(g, x)).data, act(g, fx).data, scale);
  }
  return out;
}

std::array<double, kGroupOrder> equivariance_residuals(const ImageMap& f, const Image& image) {
  const SteerableFeature fx = f(image);
  const double scale = fx.data.size() ? fx.data.cwiseAbs().maxCoeff() : 0.0;
  std::array<double, kGroupOrder> out{};
  for (auto g : all_elements()) {
    out[g.index()] = relative_gap(f(transform_image(g, image)).data, act(g, fx).data, scale);
  }
  return out;
}

double equivariance_residual(const FeatureMap& f, const SteerableFeature& x) {
  double worst = 0.0;
  for (double r : equivariance_residuals(f, x)) worst = std::max(worst, r);
  return worst;
}

double equivariance_residual(const ImageMap& f, const Image& image) {
  double worst = 0.0;
  for (double r : equivariance_residuals(f, image)) worst = std::max(worst, r);
  return worst;
}

}  // namespace octic
