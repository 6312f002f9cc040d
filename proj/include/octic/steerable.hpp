#pragma once

#include <array>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "octic/group.hpp"

namespace octic {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// The eight channel sub-blocks of a (C/8) rho_iso token, in storage order.
enum class IsoComponent { A1 = 0, A2, B1, B2, E11, E12, E21, E22 };

std::string_view iso_component_name(int component);

/// Channels per sub-block; throws unless 8 | channels.
int iso_block_size(int channels);

struct GridGeometry {
  int side = 1;  ///< tokens per image side (N)
  bool has_cls = false;

  int grid_tokens() const { return side * side; }
  int tokens() const { return grid_tokens() + (has_cls ? 1 : 0); }
  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

enum class ChannelRep { IsoMultiple, A1Multiple, None };

/// C x L token matrix with its declared channel representation.
struct SteerableFeature {
  Matrix data;
  ChannelRep rep = ChannelRep::IsoMultiple;
  GridGeometry geometry;

  int channels() const { return static_cast<int>(data.rows()); }
  int tokens() const { return static_cast<int>(data.cols()); }
};

/// perm[src] = dst.
using IndexPermutation = std::vector<int>;

/// Square images, 3 colour planes, stored plane-major then row-major.
struct Image {
  int size = 0;
  Eigen::ArrayXd pixels;

  Image() = default;
  explicit Image(int side) : size(side), pixels(Eigen::ArrayXd::Zero(3 * side * side)) {}

  double& at(int c, int row, int col) { return pixels[(c * size + row) * size + col]; }
  double at(int c, int row, int col) const { return pixels[(c * size + row) * size + col]; }
};

/// Where the cell (row, col) of an n x n grid moves under g: r rotates the
/// grid anticlockwise, (i, j) -> (n-1-j, i); s mirrors left-right,
/// (i, j) -> (i, n-1-j). Cell index is row * n + col.
IndexPermutation grid_permutation(GroupElement g, int side);

/// rho_token: grid permutation with the class token (last slot) fixed.
IndexPermutation token_permutation(GroupElement g, const GridGeometry& geometry);

/// rho_patch on the 3P^2 patch vector: rotates/mirrors each colour plane of
/// a P x P patch.
IndexPermutation patch_permutation(GroupElement g, int patch);

Image transform_image(GroupElement g, const Image& image);

/// 3 x M x M image -> 3P^2 x N^2 matrix; column t = row * N + col holds the
/// patch pixels in (colour, row, col) order.
Matrix patchify(const Image& image, int patch);

/// out.row(perm[i]) = in.row(i).
Matrix permute_rows(const Matrix& in, const IndexPermutation& perm);
/// out.col(perm[i]) = in.col(i).
Matrix permute_cols(const Matrix& in, const IndexPermutation& perm);

/// rho_chan(g) x for x with a (C/8) rho_iso channel layout.
Matrix apply_iso_action(GroupElement g, const Matrix& x);

SteerableFeature apply_channel_action(GroupElement g, const SteerableFeature& x);

/// rho_chan(g) x rho_token(g)^T.
SteerableFeature act(GroupElement g, const SteerableFeature& x);

/// A real orthogonal representation of D8 acting on the rows of a matrix.
class Representation {
 public:
  static Representation iso_multiple(int copies);
  static Representation a1_multiple(int dim);
  static Representation permutation(std::array<IndexPermutation, kGroupOrder> perms);
  static Representation patch(int patch_size);
  static Representation tokens(const GridGeometry& geometry);

  int dim() const { return dim_; }
  ChannelRep kind() const { return kind_; }

  /// rho(g) x.
  Matrix act(GroupElement g, const Matrix& x) const;
  Matrix matrix(GroupElement g) const;

 private:
  ChannelRep kind_ = ChannelRep::None;
  int dim_ = 0;
  std::array<IndexPermutation, kGroupOrder> perms_;
};

/// (1/8) sum_g rho_out(g)^T W rho_in(g): the orthogonal projection of W onto
/// intertwiners rho_in -> rho_out.
Matrix reynolds_project_intertwiner(const Matrix& w, const Representation& in,
                                    const Representation& out);

/// (1/8) sum_g rho_chan(g)^T e rho_token(g) for a C x N^2 positional encoding.
Matrix reynolds_project_posenc(const Matrix& e, const GridGeometry& geometry);

/// max |e - rho_chan(g) e rho_token(g)^T| over g.
double posenc_constraint_violation(const Matrix& e, const GridGeometry& geometry);

inline constexpr double kResidualEpsilon = 1e-30;

using FeatureMap = std::function<SteerableFeature(const SteerableFeature&)>;
using ImageMap = std::function<SteerableFeature(const Image&)>;

/// max_g |f(g.x) - g.f(x)|_inf / (|f(x)|_inf + eps).
double equivariance_residual(const FeatureMap& f, const SteerableFeature& x);
double equivariance_residual(const ImageMap& f, const Image& image);

/// Per-element residuals, one per group element in canonical order.
std::array<double, kGroupOrder> equivariance_residuals(const FeatureMap& f,
                                                       const SteerableFeature& x);
std::array<double, kGroupOrder> equivariance_residuals(const ImageMap& f, const Image& image);

}  // namespace octic
