#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <string>

#include "octic/fault.hpp"
#include "octic/group.hpp"
#include "test_util.hpp"

using namespace octic;

namespace {

// Words over {r, s} reduced with r^4 = s^2 = e and r s = s r^3 to the normal
// form s^m r^k.
std::string reduce(std::string w) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [from, to] : std::initializer_list<std::pair<std::string, std::string>>{
             {"rs", "srrr"}, {"rrrr", ""}, {"ss", ""}}) {
      const auto pos = w.find(from);
      if (pos != std::string::npos) {
        w.replace(pos, from.size(), to);
        changed = true;
      }
    }
  }
  return w;
}

std::string word(GroupElement g) {
  return std::string(g.reflections(), 's') + std::string(g.rotations(), 'r');
}

GroupElement from_word(const std::string& w) {
  const int m = static_cast<int>(std::count(w.begin(), w.end(), 's'));
  const int k = static_cast<int>(std::count(w.begin(), w.end(), 'r'));
  return GroupElement::from_powers(m, k);
}

const GroupElement r = kRotation;
const GroupElement s = kReflection;
const GroupElement e = kIdentity;

}  // namespace

TEST_CASE("generator relations") {
  CHECK(mul(r, GroupElement::from_powers(0, 3)) == e);
  CHECK(mul(mul(s, r), s) == GroupElement::from_powers(0, 3));
  CHECK(r * r * r * r == e);
  CHECK(s * s == e);
}

TEST_CASE("Cayley table matches word reduction") {
  for (auto a : all_elements()) {
    for (auto b : all_elements()) {
      const std::string w = reduce(word(a) + word(b));
      CHECK(w == reduce(w));
      CHECK(mul(a, b) == from_word(w));
    }
  }
}

TEST_CASE("Cayley table is a Latin square and associative") {
  for (auto a : all_elements()) {
    std::set<int> row, col;
    for (auto b : all_elements()) {
      row.insert((a * b).index());
      col.insert((b * a).index());
      for (auto c : all_elements()) CHECK((a * b) * c == a * (b * c));
    }
    CHECK(row.size() == 8);
    CHECK(col.size() == 8);
  }
}

TEST_CASE("inverse") {
  for (auto a : all_elements()) {
    CHECK(a * inverse(a) == e);
    CHECK(inverse(a) * a == e);
  }
  CHECK_THROWS_AS(GroupElement(8), std::out_of_range);
  CHECK_THROWS_AS(GroupElement(-1), std::out_of_range);
}

TEST_CASE("irrep labels") {
  int sum = 0;
  for (auto i : kIrreps) sum += irrep_dimension(i) * irrep_dimension(i);
  CHECK(kIrreps.size() == 5);
  CHECK(sum == 8);
  CHECK_THROWS(character(Irrep::E, r));
}

TEST_CASE("irreps are homomorphisms and characters are orthogonal") {
  for (auto g : all_elements()) {
    for (auto h : all_elements()) {
      for (auto i : kIrreps) {
        CHECK(testutil::max_abs(irrep_matrix(i, g) * irrep_matrix(i, h) - irrep_matrix(i, g * h)) == 0.0);
      }
    }
  }
  // <chi_i, chi_j> = delta_ij over the group.
  for (auto a : kIrreps) {
    for (auto b : kIrreps) {
      double acc = 0;
      for (auto g : all_elements()) acc += irrep_matrix(a, g).trace() * irrep_matrix(b, g).trace();
      CHECK(acc / 8 == doctest::Approx(a == b ? 1.0 : 0.0));
    }
  }
  CHECK(testutil::max_abs(e_matrix(r) - (Eigen::Matrix2d() << 0, -1, 1, 0).finished()) == 0.0);
  CHECK(testutil::max_abs(e_matrix(s) - (Eigen::Matrix2d() << -1, 0, 0, 1).finished()) == 0.0);
}

TEST_CASE("regular representation realises phi(g^-1 h)") {
  const auto slots = regular_slot_order();
  std::map<int, int> slot_of;
  for (int i = 0; i < 8; ++i) slot_of[slots[i].index()] = i;
  std::mt19937_64 rng(1);
  const Eigen::VectorXd phi = testutil::randn(8, 1, rng);
  for (auto g : all_elements()) {
    const Eigen::VectorXd moved = regular_matrix(g) * phi;
    for (auto h : all_elements()) CHECK(moved[slot_of[h.index()]] == phi[slot_of[(inverse(g) * h).index()]]);
    // Permutation: one 1 per row and column, no signs.
    const Matrix8d m = regular_matrix(g);
    CHECK(m.cwiseAbs().rowwise().sum().isOnes());
    CHECK(m.minCoeff() == 0.0);
  }
}

TEST_CASE("Fourier matrix is orthogonal and block-diagonalises the regular representation") {
  const Matrix8d q = fourier_matrix();
  CHECK(testutil::max_abs(q * q.transpose() - Matrix8d::Identity()) < 1e-13);
  for (auto g : all_elements()) {
    CHECK(testutil::max_abs(q.transpose() * regular_matrix(g) * q - isotypical_matrix(g)) < 1e-13);
  }
}

TEST_CASE("butterflies equal the dense transforms") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd x = testutil::randn(8, 10000, rng);
  const Matrix8d q = fourier_matrix();
  CHECK(testutil::max_abs(isotypical_to_regular(x) - q * x) < 1e-13);
  CHECK(testutil::max_abs(regular_to_isotypical(x) - q.transpose() * x) < 1e-13);
  CHECK(testutil::max_abs(regular_to_isotypical(isotypical_to_regular(x)) - x) < 1e-13);
  CHECK_THROWS_AS(regular_to_isotypical(Eigen::MatrixXd(7, 3)), std::invalid_argument);
}

TEST_CASE("isotypical action preserves the norm") {
  std::mt19937_64 rng(3);
  const Eigen::VectorXd x = testutil::randn(8, 1, rng);
  for (auto g : all_elements()) CHECK((isotypical_matrix(g) * x).norm() == doctest::Approx(x.norm()));
}

TEST_CASE("sign fault breaks the homomorphism") {
  ScopedFault guard(Fault::RhoESign);
  CHECK(testutil::max_abs(e_matrix(r) * e_matrix(r * r) - e_matrix(r * r * r)) > 1.0);
}
