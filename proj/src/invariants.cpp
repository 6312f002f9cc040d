#include "octic/invariants.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include "octic/activation.hpp"

namespace octic {

std::string_view invariant_name(InvariantKind kind) {
  switch (kind) {
    case InvariantKind::Linear: return "linear";
    case InvariantKind::PowerSpectrum: return "power";
    case InvariantKind::TripleCorrelation: return "triple";
    case InvariantKind::Polynomial: return "poly";
    case InvariantKind::MaxFiltering: return "maxfilter";
    case InvariantKind::Canonisation: return "canon";
  }
  return "?";
}

std::optional<InvariantKind> parse_invariant(std::string_view name) {
  for (auto k : kInvariantKinds) {
    if (invariant_name(k) == name) return k;
  }
  return std::nullopt;
}

int invariant_multiplicity(InvariantKind kind) {
  switch (kind) {
    case InvariantKind::Linear: return 1;
    case InvariantKind::PowerSpectrum: return 6;
    case InvariantKind::TripleCorrelation: return 15;
    case InvariantKind::Polynomial: return 32;
    case InvariantKind::MaxFiltering: return 16;
    case InvariantKind::Canonisation: return 8;
  }
  return 0;
}

int invariant_dim(InvariantKind kind, int channels) {
  return invariant_multiplicity(kind) * iso_block_size(channels);
}

namespace {

int variable_index(std::string_view name) {
  for (int i = 0; i < 8; ++i) {
    if (iso_component_name(i) == name) return i;
  }
  throw std::invalid_argument("unknown polynomial variable '" + std::string(name) + "'");
}

Monomial parse_monomial(std::string_view text, double sign) {
  Monomial m;
  m.coefficient = sign;
  while (!text.empty()) {
    const auto star = text.find('*');
    std::string_view factor = text.substr(0, star);
    text = star == std::string_view::npos ? std::string_view{} : text.substr(star + 1);
    int power = 1;
    if (const auto caret = factor.find('^'); caret != std::string_view::npos) {
      power = std::stoi(std::string(factor.substr(caret + 1)));
      factor = factor.substr(0, caret);
    }
    if (!factor.empty() && (std::isdigit(static_cast<unsigned char>(factor[0])) || factor[0] == '.')) {
      m.coefficient *= std::pow(std::stod(std::string(factor)), power);
    } else {
      m.powers[variable_index(factor)] += power;
    }
  }
  return m;
}

std::vector<Polynomial> parse_all(std::initializer_list<std::string_view> texts) {
  std::vector<Polynomial> out;
  for (auto t : texts) out.push_back(parse_polynomial(t));
  return out;
}

}  // namespace

Polynomial parse_polynomial(std::string_view text) {
  Polynomial p;
  std::string compact;
  for (char ch : text) {
    if (ch != ' ') compact.push_back(ch);
  }
  std::string_view rest = compact;
  double sign = 1.0;
  if (!rest.empty() && (rest[0] == '+' || rest[0] == '-')) {
    sign = rest[0] == '-' ? -1.0 : 1.0;
    rest.remove_prefix(1);
  }
  while (!rest.empty()) {
    const auto next = rest.find_first_of("+-");
    p.push_back(parse_monomial(rest.substr(0, next), sign));
    if (next == std::string_view::npos) break;
    sign = rest[next] == '-' ? -1.0 : 1.0;
    rest.remove_prefix(next + 1);
  }
  if (p.empty()) throw std::invalid_argument("empty polynomial");
  return p;
}

double evaluate(const Polynomial& p, const double* v) {
  double sum = 0.0;
  for (const auto& m : p) {
    double term = m.coefficient;
    for (int i = 0; i < 8; ++i) {
      for (int k = 0; k < m.powers[i]; ++k) term *= v[i];
    }
    sum += term;
  }
  return sum;
}

void accumulate_gradient(const Polynomial& p, const double* v, double scale, double* grad) {
  for (const auto& m : p) {
    for (int i = 0; i < 8; ++i) {
      if (m.powers[i] == 0) continue;
      double term = scale * m.coefficient * m.powers[i];
      for (int j = 0; j < 8; ++j) {
        const int power = j == i ? m.powers[j] - 1 : m.powers[j];
        for (int k = 0; k < power; ++k) term *= v[j];
      }
      grad[i] += term;
    }
  }
}

const std::vector<Polynomial>& triple_correlation_basis() {
  static const std::vector<Polynomial> basis = parse_all({
      "A1^3",
      "A1*E21^2 + A1*E22^2",
      "A1*E11*E21 + A1*E12*E22",
      "A1*E11^2 + A1*E12^2",
      "A1*B2^2",
      "A1*B1^2",
      "A1*A2^2",
      "B2*E21*E22",
      "B2*E12*E21 + B2*E11*E22",
      "B2*E11*E12",
      "B1*E21^2 - B1*E22^2",
      "B1*E11*E21 - B1*E12*E22",
      "B1*E11^2 - B1*E12^2",
      "A2*E12*E21 - A2*E11*E22",
      "A2*B1*B2",
  });
  return basis;
}

const std::vector<Polynomial>& polynomial_generators() {
  static const std::vector<Polynomial> basis = parse_all({
      "A1",
      "E21^2 + E22^2",
      "E11*E21 + E12*E22",
      "E11^2 + E12^2",
      "B2^2",
      "B1^2",
      "A2^2",
      "B2*E21*E22",
      "B2*E12*E21 + B2*E11*E22",
      "B2*E11*E12",
      "B1*E21^2 - B1*E22^2",
      "B1*E11*E21 - B1*E12*E22",
      "B1*E11^2 - B1*E12^2",
      "A2*E12*E21 - A2*E11*E22",
      "A2*B1*B2",
      "E21^4 + E22^4",
      "E11*E21^3 + E12*E22^3",
      "E11^2*E21^2 + E12^2*E22^2",
      "E11^3*E21 + E12^3*E22",
      "E11^4 + E12^4",
      "B1*B2*E12*E21 - B1*B2*E11*E22",
      "A2*B2*E21^2 - A2*B2*E22^2",
      "A2*B2*E11*E21 - A2*B2*E12*E22",
      "A2*B2*E11^2 - A2*B2*E12^2",
      "A2*B1*E21*E22",
      "A2*B1*E12*E21 + A2*B1*E11*E22",
      "A2*B1*E11*E12",
      "A2*E21^3*E22 - A2*E21*E22^3",
      "A2*E12*E21^3 - A2*E11*E22^3",
      "A2*E11*E12*E21^2 - A2*E11*E12*E22^2",
      "A2*E11^2*E12*E21 - A2*E11*E12^2*E22",
      "A2*E11^3*E12 - A2*E11*E12^3",
  });
  return basis;
}

namespace {

using Basis = std::vector<Polynomial>;

Matrix eval_basis(const Basis& basis, const Matrix& x) {
  const int c = iso_block_size(static_cast<int>(x.rows()));
  const int k = static_cast<int>(basis.size());
  Matrix out(k * c, x.cols());
  double v[8];
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    for (int j = 0; j < c; ++j) {
      for (int s = 0; s < 8; ++s) v[s] = x(s * c + j, t);
      for (int b = 0; b < k; ++b) out(b * c + j, t) = evaluate(basis[b], v);
    }
  }
  return out;
}

Matrix eval_basis_vjp(const Basis& basis, const Matrix& x, const Matrix& dy) {
  const int c = iso_block_size(static_cast<int>(x.rows()));
  const int k = static_cast<int>(basis.size());
  Matrix dx = Matrix::Zero(x.rows(), x.cols());
  double v[8];
  double g[8];
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    for (int j = 0; j < c; ++j) {
      for (int s = 0; s < 8; ++s) {
        v[s] = x(s * c + j, t);
        g[s] = 0.0;
      }
      for (int b = 0; b < k; ++b) accumulate_gradient(basis[b], v, dy(b * c + j, t), g);
      for (int s = 0; s < 8; ++s) dx(s * c + j, t) = g[s];
    }
  }
  return dx;
}

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

Matrix power_spectrum(const Matrix& x) {
  const int c = iso_block_size(static_cast<int>(x.rows()));
  Matrix out(6 * c, x.cols());
  out.middleRows(0, c) = x.middleRows(0, c);
  for (int b = 1; b < 4; ++b) out.middleRows(b * c, c) = x.middleRows(b * c, c).cwiseAbs();
  for (int d = 0; d < 2; ++d) {
    const auto a = x.middleRows((4 + 2 * d) * c, c).array();
    const auto b = x.middleRows((5 + 2 * d) * c, c).array();
    out.middleRows((4 + d) * c, c) = (a.square() + b.square()).sqrt().matrix();
  }
  return out;
}

Matrix power_spectrum_vjp(const Matrix& x, const Matrix& dy) {
  const int c = iso_block_size(static_cast<int>(x.rows()));
  Matrix dx(x.rows(), x.cols());
  dx.middleRows(0, c) = dy.middleRows(0, c);
  for (int b = 1; b < 4; ++b) {
    dx.middleRows(b * c, c) = x.middleRows(b * c, c).unaryExpr(&sign).cwiseProduct(dy.middleRows(b * c, c));
  }
  for (int d = 0; d < 2; ++d) {
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
      for (int j = 0; j < c; ++j) {
        const double a = x((4 + 2 * d) * c + j, t);
        const double b = x((5 + 2 * d) * c + j, t);
        const double n = std::hypot(a, b);
        const double scale = n > 0 ? dy((4 + d) * c + j, t) / n : 0.0;
        dx((4 + 2 * d) * c + j, t) = scale * a;
        dx((5 + 2 * d) * c + j, t) = scale * b;
      }
    }
  }
  return dx;
}

std::array<Matrix, kGroupOrder> orbit(const Matrix& x) {
  std::array<Matrix, kGroupOrder> out;
  for (auto g : all_elements()) out[g.index()] = apply_iso_action(g, x);
  return out;
}

void require_templates(const InvariantParams& p, int channels) {
  if (p.templates.rows() != 2 * channels || p.templates.cols() != channels) {
    throw std::invalid_argument("max filtering needs 2C x C templates");
  }
}

void require_reference(const InvariantParams& p, int channels) {
  if (p.reference.size() != channels) throw std::invalid_argument("canonisation needs a C-dim reference");
}

// For every (template, token), the first g in canonical order attaining the max.
struct MaxFilterResult {
  Matrix value;
  Eigen::MatrixXi arg;
};

MaxFilterResult max_filter(const Matrix& y, const std::array<Matrix, kGroupOrder>& xs) {
  MaxFilterResult r{y * xs[0], Eigen::MatrixXi::Zero(y.rows(), xs[0].cols())};
  for (int g = 1; g < kGroupOrder; ++g) {
    const Matrix s = y * xs[g];
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s.data()[i] > r.value.data()[i]) {
        r.value.data()[i] = s.data()[i];
        r.arg.data()[i] = g;
      }
    }
  }
  return r;
}

}  // namespace

std::vector<GroupElement> canonical_elements(const Vector& reference, const Matrix& x) {
  require_reference({Matrix(), reference}, static_cast<int>(x.rows()));
  std::vector<GroupElement> out(x.cols(), kIdentity);
  Eigen::RowVectorXd best = reference.transpose() * x;
  for (auto g : all_elements()) {
    if (g == kIdentity) continue;
    const Eigen::RowVectorXd s = reference.transpose() * apply_iso_action(g, x);
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
      if (s[t] > best[t]) {
        best[t] = s[t];
        out[t] = g;
      }
    }
  }
  return out;
}

Matrix psi(InvariantKind kind, const InvariantParams& p, const Matrix& x) {
  const int channels = static_cast<int>(x.rows());
  const int c = iso_block_size(channels);
  switch (kind) {
    case InvariantKind::Linear: return x.topRows(c);
    case InvariantKind::PowerSpectrum: return power_spectrum(x);
    case InvariantKind::TripleCorrelation: return eval_basis(triple_correlation_basis(), x);
    case InvariantKind::Polynomial: return eval_basis(polynomial_generators(), x);
    case InvariantKind::MaxFiltering:
      require_templates(p, channels);
      return max_filter(p.templates, orbit(x)).value;
    case InvariantKind::Canonisation: {
      const auto gs = canonical_elements(p.reference, x);
      Matrix out(x.rows(), x.cols());
      for (Eigen::Index t = 0; t < x.cols(); ++t) out.col(t) = apply_iso_action(gs[t], x.col(t));
      return out;
    }
  }
  throw std::invalid_argument("unknown invariant kind");
}

Matrix psi_vjp(InvariantKind kind, const InvariantParams& p, const Matrix& x, const Matrix& dy,
               InvariantParams* dp) {
  const int channels = static_cast<int>(x.rows());
  const int c = iso_block_size(channels);
  switch (kind) {
    case InvariantKind::Linear: {
      Matrix dx = Matrix::Zero(x.rows(), x.cols());
      dx.topRows(c) = dy;
      return dx;
    }
    case InvariantKind::PowerSpectrum: return power_spectrum_vjp(x, dy);
    case InvariantKind::TripleCorrelation: return eval_basis_vjp(triple_correlation_basis(), x, dy);
    case InvariantKind::Polynomial: return eval_basis_vjp(polynomial_generators(), x, dy);
    case InvariantKind::MaxFiltering: {
      require_templates(p, channels);
      const auto xs = orbit(x);
      const auto r = max_filter(p.templates, xs);
      // Group the (template, token) pairs by their maximiser so each g costs
      // two matrix products.
      std::array<Matrix, kGroupOrder> dgx;
      for (int g = 0; g < kGroupOrder; ++g) {
        const Matrix masked = (r.arg.array() == g).cast<double>().matrix().cwiseProduct(dy);
        dgx[g] = p.templates.transpose() * masked;
        if (dp) {
          if (dp->templates.size() == 0) dp->templates = Matrix::Zero(p.templates.rows(), p.templates.cols());
          dp->templates.noalias() += masked * xs[g].transpose();
        }
      }
      Matrix dx = Matrix::Zero(x.rows(), x.cols());
      for (auto g : all_elements()) dx += apply_iso_action(inverse(g), dgx[g.index()]);
      return dx;
    }
    case InvariantKind::Canonisation: {
      const auto gs = canonical_elements(p.reference, x);
      Matrix dx(x.rows(), x.cols());
      for (Eigen::Index t = 0; t < x.cols(); ++t) dx.col(t) = apply_iso_action(inverse(gs[t]), dy.col(t));
      if (dp && dp->reference.size() == 0) dp->reference = Vector::Zero(p.reference.size());
      return dx;
    }
  }
  throw std::invalid_argument("unknown invariant kind");
}

InvariantHead InvariantHead::make(InvariantKind kind, int channels, std::mt19937_64& rng) {
  InvariantHead h;
  h.kind = kind;
  const double bound = 1.0 / std::sqrt(static_cast<double>(channels));
  std::uniform_real_distribution<double> dist(-bound, bound);
  if (kind == InvariantKind::MaxFiltering) {
    h.params.templates = Matrix::NullaryExpr(2 * channels, channels, [&] { return dist(rng); });
  }
  if (kind == InvariantKind::Canonisation) {
    h.params.reference = Vector::NullaryExpr(channels, [&] { return dist(rng); });
  }
  h.fc1 = DenseLinear::random(invariant_dim(kind, channels), channels, true, rng);
  h.fc2 = DenseLinear::random(channels, channels, true, rng);
  return h;
}

InvariantHead InvariantHead::zeros_like(const InvariantHead& h) {
  InvariantHead z;
  z.kind = h.kind;
  z.params.templates = Matrix::Zero(h.params.templates.rows(), h.params.templates.cols());
  z.params.reference = Vector::Zero(h.params.reference.size());
  z.fc1 = DenseLinear::zeros(h.fc1.in_channels(), h.fc1.out_channels(), h.fc1.has_bias());
  z.fc2 = DenseLinear::zeros(h.fc2.in_channels(), h.fc2.out_channels(), h.fc2.has_bias());
  return z;
}

void InvariantHead::collect(const std::string& prefix, TensorList& out) {
  if (params.templates.size() > 0) register_tensor(out, join_path(prefix, "templates"), params.templates);
  if (params.reference.size() > 0) register_tensor(out, join_path(prefix, "reference"), params.reference);
  fc1.collect(join_path(prefix, "mlp.fc1"), out);
  fc2.collect(join_path(prefix, "mlp.fc2"), out);
}

Matrix invariant_head_forward(const InvariantHead& h, const Matrix& x, InvariantHeadCache* cache) {
  InvariantHeadCache local;
  InvariantHeadCache& c = cache ? *cache : local;
  c.input = x;
  c.features = psi(h.kind, h.params, x);
  c.hidden_pre = dense_forward(h.fc1, c.features);
  c.hidden = gelu_forward(c.hidden_pre);
  return dense_forward(h.fc2, c.hidden);
}

InvariantHeadGrad invariant_head_vjp(const InvariantHead& h, const InvariantHeadCache& c, const Matrix& dy) {
  InvariantHeadGrad g;
  g.params = InvariantHead::zeros_like(h);
  auto g2 = dense_vjp(h.fc2, c.hidden, dy);
  g.params.fc2 = std::move(g2.weights);
  auto g1 = dense_vjp(h.fc1, c.features, gelu_vjp(c.hidden_pre, g2.input));
  g.params.fc1 = std::move(g1.weights);
  g.input = psi_vjp(h.kind, h.params, c.input, g1.input, &g.params.params);
  return g;
}

SteerableFeature invariant_head(const InvariantHead& h, const SteerableFeature& x) {
  if (x.rep != ChannelRep::IsoMultiple) throw std::invalid_argument("invariant head expects iso features");
  return {invariant_head_forward(h, x.data), ChannelRep::A1Multiple, x.geometry};
}

}  // namespace octic
