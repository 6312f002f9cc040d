#pragma once

#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "octic/dense.hpp"
#include "octic/steerable.hpp"

namespace octic {

/// Maps from (C/8) rho_iso tokens to invariant (A1-typed) features.
enum class InvariantKind { Linear, PowerSpectrum, TripleCorrelation, Polynomial, MaxFiltering, Canonisation };

inline constexpr std::array<InvariantKind, 6> kInvariantKinds{
    InvariantKind::Linear,     InvariantKind::PowerSpectrum, InvariantKind::TripleCorrelation,
    InvariantKind::Polynomial, InvariantKind::MaxFiltering,  InvariantKind::Canonisation};

/// CLI spelling: linear, power, triple, poly, maxfilter, canon.
std::string_view invariant_name(InvariantKind kind);
std::optional<InvariantKind> parse_invariant(std::string_view name);

/// K such that the invariant has K * C / 8 features.
int invariant_multiplicity(InvariantKind kind);
int invariant_dim(InvariantKind kind, int channels);

/// One polynomial invariant as a sum of monomials in the eight iso
/// components of a single copy (variable order A1 A2 B1 B2 E11 E12 E21 E22).
struct Monomial {
  double coefficient = 1.0;
  std::array<int, 8> powers{};
};
using Polynomial = std::vector<Monomial>;

/// Parses e.g. "B1*E11^2-B1*E12^2".
Polynomial parse_polynomial(std::string_view text);
double evaluate(const Polynomial& p, const double* v);
/// Adds scale * dp/dv into grad[0..8).
void accumulate_gradient(const Polynomial& p, const double* v, double scale, double* grad);

/// The 15 degree-3 invariants and the 32 invariant-ring generators.
const std::vector<Polynomial>& triple_correlation_basis();
const std::vector<Polynomial>& polynomial_generators();

/// Learnable parts of psi: 2C templates for max filtering, one reference
/// token for canonisation. Unused members stay empty.
struct InvariantParams {
  Matrix templates;  ///< 2C x C, row k = y_k
  Vector reference;  ///< C
};

/// Row layout of psi(x): feature k of copy j is row k * (C/8) + j. Max
/// filtering gives one row per template; canonisation returns rho(g*) x.
Matrix psi(InvariantKind kind, const InvariantParams& p, const Matrix& x);

/// Gradient with respect to x; parameter gradients are added to `dp` when
/// given. |.|'(0) = 0, and max/argmax gradients go through the first
/// maximiser in canonical element order. The canonisation reference gets
/// no gradient (the argmax is piecewise constant in it).
Matrix psi_vjp(InvariantKind kind, const InvariantParams& p, const Matrix& x, const Matrix& dy,
               InvariantParams* dp = nullptr);

/// Index of the maximising element for canonisation, per token.
std::vector<GroupElement> canonical_elements(const Vector& reference, const Matrix& x);

/// psi tokenwise, then a shared MLP (KC/8 -> C, GELU, C -> C).
struct InvariantHead {
  InvariantKind kind = InvariantKind::PowerSpectrum;
  InvariantParams params;
  DenseLinear fc1, fc2;

  static InvariantHead make(InvariantKind kind, int channels, std::mt19937_64& rng);
  static InvariantHead zeros_like(const InvariantHead& h);
  void collect(const std::string& prefix, TensorList& out);
};

struct InvariantHeadCache {
  Matrix input, features, hidden_pre, hidden;
};

Matrix invariant_head_forward(const InvariantHead& h, const Matrix& x, InvariantHeadCache* cache = nullptr);

struct InvariantHeadGrad {
  Matrix input;
  InvariantHead params;
};

InvariantHeadGrad invariant_head_vjp(const InvariantHead& h, const InvariantHeadCache& cache, const Matrix& dy);

/// Output carries ChannelRep::A1Multiple and the input geometry.
SteerableFeature invariant_head(const InvariantHead& h, const SteerableFeature& x);

}  // namespace octic
