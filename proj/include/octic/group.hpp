#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string_view>

#include <Eigen/Dense>

namespace octic {

inline constexpr int kGroupOrder = 8;

/// An element s^m r^k of the octic group D8.
///
/// Elements are indexed 4m + k, giving the canonical order
/// e, r, r2, r3, s, sr, sr2, sr3. Every table in the library (tie-breaks,
/// report columns, checkpoints) uses this order.
class GroupElement {
 public:
  constexpr GroupElement() = default;

  constexpr explicit GroupElement(int index) : index_(static_cast<std::uint8_t>(index)) {
    if (index < 0 || index >= kGroupOrder) {
      throw std::out_of_range("group element index must be in [0, 8)");
    }
  }

  /// s^reflections r^rotations, exponents taken modulo 2 and 4.
  static constexpr GroupElement from_powers(int reflections, int rotations) {
    const int m = ((reflections % 2) + 2) % 2;
    const int k = ((rotations % 4) + 4) % 4;
    return GroupElement(4 * m + k);
  }

  constexpr int index() const { return index_; }
  constexpr int rotations() const { return index_ % 4; }
  constexpr int reflections() const { return index_ / 4; }
  constexpr bool is_reflection() const { return index_ >= 4; }

  std::string_view name() const;

  friend constexpr bool operator==(GroupElement, GroupElement) = default;

 private:
  std::uint8_t index_ = 0;
};

inline constexpr GroupElement kIdentity{};
inline constexpr GroupElement kRotation = GroupElement::from_powers(0, 1);
inline constexpr GroupElement kReflection = GroupElement::from_powers(1, 0);

constexpr std::array<GroupElement, kGroupOrder> all_elements() {
  std::array<GroupElement, kGroupOrder> out{};
  for (int i = 0; i < kGroupOrder; ++i) out[i] = GroupElement(i);
  return out;
}

// r^a s = s r^-a gives (s^m1 r^k1)(s^m2 r^k2) = s^(m1+m2) r^((-1)^m2 k1 + k2).
constexpr GroupElement mul(GroupElement a, GroupElement b) {
  const int k1 = b.is_reflection() ? -a.rotations() : a.rotations();
  return GroupElement::from_powers(a.reflections() + b.reflections(), k1 + b.rotations());
}

constexpr GroupElement operator*(GroupElement a, GroupElement b) { return mul(a, b); }

constexpr GroupElement inverse(GroupElement a) {
  // Reflections are involutions; rotations invert their angle.
  return a.is_reflection() ? a : GroupElement::from_powers(0, -a.rotations());
}

enum class Irrep { A1, A2, B1, B2, E };

inline constexpr std::array<Irrep, 5> kIrreps{Irrep::A1, Irrep::A2, Irrep::B1, Irrep::B2,
                                               Irrep::E};

constexpr int irrep_dimension(Irrep i) { return i == Irrep::E ? 2 : 1; }

std::string_view irrep_name(Irrep i);

/// Character of a one-dimensional irrep (+1 or -1). Throws for E.
int character(Irrep i, GroupElement g);

/// rho_E(g) with rho_E(r) = [[0,-1],[1,0]] and rho_E(s) = diag(-1, 1).
Eigen::Matrix2d e_matrix(GroupElement g);

Eigen::MatrixXd irrep_matrix(Irrep i, GroupElement g);

/// Element stored in each slot of a regular vector:
/// (e, r3, r2, r, s, sr3, sr2, sr).
std::array<GroupElement, kGroupOrder> regular_slot_order();

/// perm[src] = dst: rho_reg(g) moves the value in slot src to slot dst.
using SlotPermutation = std::array<int, kGroupOrder>;

/// Permutation realising [rho_reg(g) phi](h) = phi(g^-1 h).
SlotPermutation regular_permutation(GroupElement g);

using Matrix8d = Eigen::Matrix<double, 8, 8>;

Matrix8d regular_matrix(GroupElement g);

/// rho_A1 + rho_A2 + rho_B1 + rho_B2 + 2 rho_E in the component order
/// (A1, A2, B1, B2, E11, E12, E21, E22); the doublets are (E11, E12) and
/// (E21, E22).
Matrix8d isotypical_matrix(GroupElement g);

/// The inverse Fourier transform Q_reg (isotypical -> regular).
Matrix8d fourier_matrix();

inline constexpr double kSqrt2Over4 = 0.35355339059327376220;

/// Isotypical -> regular butterfly (16 adds, 8 more adds, 8 scalings).
/// T is any type with +, - and scalar multiplication: double, or an Eigen
/// array holding one component of many 8-vectors.
template <class T>
std::array<T, 8> isotypical_to_regular_butterfly(const std::array<T, 8>& x) {
  const T a = x[0] + x[1];
  const T b = x[0] - x[1];
  const T c = x[2] + x[3];
  const T d = x[2] - x[3];
  const T e = x[4] + x[5];
  const T f = x[4] - x[5];
  const T g = x[6] + x[7];
  const T h = x[6] - x[7];
  const T apc = a + c;
  const T amc = a - c;
  const T bpd = b + d;
  const T bmd = b - d;
  const T eph = e + h;
  const T emh = e - h;
  const T fpg = f + g;
  const T fmg = f - g;
  return {kSqrt2Over4 * (apc + eph), kSqrt2Over4 * (amc + fmg), kSqrt2Over4 * (apc - eph),
          kSqrt2Over4 * (amc - fmg), kSqrt2Over4 * (bpd - fpg), kSqrt2Over4 * (bmd - emh),
          kSqrt2Over4 * (bpd + fpg), kSqrt2Over4 * (bmd + emh)};
}

/// Regular -> isotypical butterfly, the transpose of the one above.
template <class T>
std::array<T, 8> regular_to_isotypical_butterfly(const std::array<T, 8>& y) {
  const T s02 = y[0] + y[2];
  const T d02 = y[0] - y[2];
  const T s13 = y[1] + y[3];
  const T d13 = y[1] - y[3];
  const T s46 = y[6] + y[4];
  const T d46 = y[6] - y[4];
  const T s57 = y[7] + y[5];
  const T d57 = y[7] - y[5];
  const T a = s02 + s13;
  const T c = s02 - s13;
  const T b = s46 + s57;
  const T d = s46 - s57;
  const T e = d02 + d57;
  const T h = d02 - d57;
  const T f = d13 + d46;
  const T g = d46 - d13;
  return {kSqrt2Over4 * (a + b), kSqrt2Over4 * (a - b), kSqrt2Over4 * (c + d),
          kSqrt2Over4 * (c - d), kSqrt2Over4 * (e + f), kSqrt2Over4 * (e - f),
          kSqrt2Over4 * (g + h), kSqrt2Over4 * (g - h)};
}

/// Batched transforms over the columns of an 8 x B matrix.
Eigen::MatrixXd regular_to_isotypical(const Eigen::MatrixXd& x);
Eigen::MatrixXd isotypical_to_regular(const Eigen::MatrixXd& x);

}  // namespace octic
