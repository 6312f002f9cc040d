#include "octic/group.hpp"

#include <cmath>

#include "octic/fault.hpp"

namespace octic {

std::string_view GroupElement::name() const {
  static constexpr std::array<std::string_view, kGroupOrder> kNames{
      "e", "r", "r2", "r3", "s", "sr", "sr2", "sr3"};
  return kNames[index_];
}

std::string_view irrep_name(Irrep i) {
  switch (i) {
    case Irrep::A1: return "A1";
    case Irrep::A2: return "A2";
    case Irrep::B1: return "B1";
    case Irrep::B2: return "B2";
    case Irrep::E: return "E";
  }
  return "?";
}

int character(Irrep i, GroupElement g) {
  const int m = g.reflections();
  const int k = g.rotations();
  switch (i) {
    case Irrep::A1: return 1;
    case Irrep::A2: return m ? -1 : 1;
    case Irrep::B1: return (k % 2) ? -1 : 1;
    case Irrep::B2: return ((k + m) % 2) ? -1 : 1;
    case Irrep::E: break;
  }
  throw std::invalid_argument("character() is defined for one-dimensional irreps only");
}

Eigen::Matrix2d e_matrix(GroupElement g) {
  // rho_E(r)^k is a rotation by k * 90 degrees.
  static const std::array<Eigen::Matrix2d, 4> kRot = [] {
    std::array<Eigen::Matrix2d, 4> out;
    out[0] << 1, 0, 0, 1;
    out[1] << 0, -1, 1, 0;
    out[2] << -1, 0, 0, -1;
    out[3] << 0, 1, -1, 0;
    return out;
  }();
  Eigen::Matrix2d m = kRot[g.rotations()];
  if (g.is_reflection()) m.row(0) *= -1.0;  // rho_E(s) = diag(-1, 1)
  if (active_fault() == Fault::RhoESign && g == kRotation) m = -m;
  return m;
}

Eigen::MatrixXd irrep_matrix(Irrep i, GroupElement g) {
  if (i == Irrep::E) return e_matrix(g);
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = character(i, g);
  return m;
}

std::array<GroupElement, kGroupOrder> regular_slot_order() {
  return {GroupElement::from_powers(0, 0), GroupElement::from_powers(0, 3),
          GroupElement::from_powers(0, 2), GroupElement::from_powers(0, 1),
          GroupElement::from_powers(1, 0), GroupElement::from_powers(1, 3),
          GroupElement::from_powers(1, 2), GroupElement::from_powers(1, 1)};
}

namespace {

std::array<int, kGroupOrder> slot_of_element() {
  std::array<int, kGroupOrder> slot{};
  const auto order = regular_slot_order();
  for (int s = 0; s < kGroupOrder; ++s) slot[order[s].index()] = s;
  return slot;
}

}  // namespace

SlotPermutation regular_permutation(GroupElement g) {
  // The value phi(u) lands at slot(g u).
  static const auto kSlot = slot_of_element();
  const auto order = regular_slot_order();
  SlotPermutation perm{};
  for (int src = 0; src < kGroupOrder; ++src) perm[src] = kSlot[mul(g, order[src]).index()];
  return perm;
}

Matrix8d regular_matrix(GroupElement g) {
  Matrix8d m = Matrix8d::Zero();
  const auto perm = regular_permutation(g);
  for (int src = 0; src < kGroupOrder; ++src) m(perm[src], src) = 1.0;
  return m;
}

Matrix8d isotypical_matrix(GroupElement g) {
  Matrix8d m = Matrix8d::Zero();
  m(0, 0) = character(Irrep::A1, g);
  m(1, 1) = character(Irrep::A2, g);
  m(2, 2) = character(Irrep::B1, g);
  m(3, 3) = character(Irrep::B2, g);
  const Eigen::Matrix2d e = e_matrix(g);
  m.block<2, 2>(4, 4) = e;
  m.block<2, 2>(6, 6) = e;
  return m;
}

Matrix8d fourier_matrix() {
  Matrix8d q;
  // clang-format off
  q << 1,  1,  1,  1,  1,  1,  1, -1,
       1,  1, -1, -1,  1, -1, -1, -1,
       1,  1,  1,  1, -1, -1, -1,  1,
       1,  1, -1, -1, -1,  1,  1,  1,
       1, -1,  1, -1, -1,  1, -1, -1,
       1, -1, -1,  1, -1, -1,  1, -1,
       1, -1,  1, -1,  1, -1,  1,  1,
       1, -1, -1,  1,  1,  1, -1,  1;
  // clang-format on
  return q * (std::sqrt(2.0) / 4.0);
}

namespace {

template <class Transform>
Eigen::MatrixXd transform_columns(const Eigen::MatrixXd& x, Transform transform) {
  if (x.rows() != kGroupOrder) {
    throw std::invalid_argument("D8 Fourier transforms expect an 8 x B matrix");
  }
  std::array<Eigen::ArrayXXd, 8> in;
  for (int i = 0; i < kGroupOrder; ++i) in[i] = x.row(i).array();
  const auto out = transform(in);
  Eigen::MatrixXd y(kGroupOrder, x.cols());
  for (int i = 0; i < kGroupOrder; ++i) y.row(i) = out[i].matrix();
  return y;
}

}  // namespace

Eigen::MatrixXd regular_to_isotypical(const Eigen::MatrixXd& x) {
  return transform_columns(x, [](const auto& v) { return regular_to_isotypical_butterfly(v); });
}

Eigen::MatrixXd isotypical_to_regular(const Eigen::MatrixXd& x) {
  return transform_columns(x, [](const auto& v) { return isotypical_to_regular_butterfly(v); });
}

}  // namespace octic
