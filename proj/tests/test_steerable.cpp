#include <doctest.h>

#include <random>

#include "octic/equiv_linear.hpp"
#include "octic/steerable.hpp"
#include "test_util.hpp"

using namespace octic;
using testutil::max_abs;

TEST_CASE("grid action: r is anticlockwise, s mirrors left-right") {
  // 3x3 grid; the top-right cell (0, 2) goes to the top-left (0, 0) under r.
  const auto pr = grid_permutation(kRotation, 3);
  CHECK(pr[0 * 3 + 2] == 0 * 3 + 0);
  CHECK(pr[0 * 3 + 0] == 2 * 3 + 0);
  const auto ps = grid_permutation(kReflection, 3);
  CHECK(ps[1 * 3 + 0] == 1 * 3 + 2);
}

TEST_CASE("token permutations compose like the group and fix the class token") {
  const GridGeometry geo{4, true};
  for (auto g : all_elements()) {
    const auto pg = token_permutation(g, geo);
    CHECK(pg.back() == geo.tokens() - 1);
    for (auto h : all_elements()) {
      const auto ph = token_permutation(h, geo);
      const auto pgh = token_permutation(g * h, geo);
      for (int i = 0; i < geo.tokens(); ++i) CHECK(pg[ph[i]] == pgh[i]);
    }
  }
}

TEST_CASE("image transform and patchify commute with the patch and token actions") {
  std::mt19937_64 rng(5);
  const Image img = testutil::random_image(12, rng);
  const int p = 3;
  const Matrix base = patchify(img, p);
  const auto rep = Representation::patch(p);
  for (auto g : all_elements()) {
    const Matrix lhs = patchify(transform_image(g, img), p);
    const Matrix rhs = permute_cols(rep.act(g, base), token_permutation(g, GridGeometry{4, false}));
    CHECK(max_abs(lhs - rhs) == 0.0);
  }
  CHECK_THROWS_AS(patchify(img, 5), std::invalid_argument);
}

TEST_CASE("iso action is an orthogonal representation") {
  std::mt19937_64 rng(6);
  const Matrix x = testutil::randn(24, 5, rng);
  for (auto g : all_elements()) {
    CHECK((apply_iso_action(g, x).norm()) == doctest::Approx(x.norm()));
    for (auto h : all_elements()) {
      CHECK(max_abs(apply_iso_action(g, apply_iso_action(h, x)) - apply_iso_action(g * h, x)) < 1e-15);
    }
  }
  CHECK_THROWS_AS(apply_iso_action(kRotation, Matrix(12, 2)), std::invalid_argument);
}

namespace {

// Dimension of {W : W rho_in(g) = rho_out(g) W for all g} from the null space
// of the stacked linear constraints.
int intertwiner_dimension(const Representation& in, const Representation& out) {
  const int n = in.dim() * out.dim();
  Matrix constraints(8 * n, n);
  for (auto g : all_elements()) {
    const Matrix ri = in.matrix(g);
    const Matrix ro = out.matrix(g);
    // vec(W ri - ro W) = (ri^T kron I - I kron ro) vec(W)
    Matrix k = Matrix::Zero(n, n);
    for (int a = 0; a < in.dim(); ++a) {
      for (int b = 0; b < in.dim(); ++b) {
        k.block(a * out.dim(), b * out.dim(), out.dim(), out.dim()) += ri(b, a) * Matrix::Identity(out.dim(), out.dim());
      }
      k.block(a * out.dim(), a * out.dim(), out.dim(), out.dim()) -= ro;
    }
    constraints.middleRows(g.index() * n, n) = k;
  }
  Eigen::JacobiSVD<Matrix> svd(constraints);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()[i] > 1e-9 ? 1 : 0;
  return n - rank;
}

}  // namespace

TEST_CASE("intertwiner space of k rho_iso has dimension 8 k^2") {
  for (int k : {1, 2}) {
    const auto rep = Representation::iso_multiple(k);
    CHECK(intertwiner_dimension(rep, rep) == 8 * k * k);
  }
}

TEST_CASE("Reynolds projection lands on the block pattern") {
  std::mt19937_64 rng(7);
  for (auto [ci, co] : {std::pair{8, 8}, std::pair{16, 24}}) {
    const auto in = Representation::iso_multiple(ci / 8);
    const auto out = Representation::iso_multiple(co / 8);
    for (int t = 0; t < 20; ++t) {
      const Matrix w = testutil::randn(co, ci, rng);
      const Matrix p = reynolds_project_intertwiner(w, in, out);
      CHECK(max_abs(assemble_dense(extract_blocks(p)) - p) < 1e-12);
      CHECK(max_abs(reynolds_project_intertwiner(p, in, out) - p) < 1e-12);
      for (auto g : all_elements()) CHECK(max_abs(p * in.matrix(g) - out.matrix(g) * p) < 1e-12);
    }
  }
  // C = 8: 4 one-dimensional entries plus one 2x2 W_E act as 12 multiplications.
  CHECK(equiv_linear_macs_per_token(8, 8) == 12);
  CHECK_THROWS_AS(reynolds_project_intertwiner(Matrix(8, 16), Representation::iso_multiple(1),
                                               Representation::iso_multiple(1)),
                  std::invalid_argument);
}

TEST_CASE("positional-encoding projection satisfies the fixed-point constraint") {
  std::mt19937_64 rng(8);
  const GridGeometry geo{4, false};
  const Matrix e = testutil::randn(16, 16, rng);
  CHECK(posenc_constraint_violation(e, geo) > 0.1);
  const Matrix p = reynolds_project_posenc(e, geo);
  CHECK(posenc_constraint_violation(p, geo) < 1e-12);
  CHECK(max_abs(reynolds_project_posenc(p, geo) - p) < 1e-12);
}

TEST_CASE("equivariance residual detects a non-equivariant map") {
  std::mt19937_64 rng(9);
  const SteerableFeature x{testutil::randn(16, 10, rng), ChannelRep::IsoMultiple, GridGeometry{3, true}};
  const FeatureMap identity = [](const SteerableFeature& f) { return f; };
  CHECK(equivariance_residual(identity, x) == 0.0);
  const FeatureMap bad = [](const SteerableFeature& f) {
    SteerableFeature out = f;
    out.data.row(0).array() += f.data.row(20 % f.data.rows()).array();
    return out;
  };
  CHECK(equivariance_residual(bad, x) > 1e-3);
}
