#include "octic/check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <random>

#include "octic/activation.hpp"
#include "octic/attention.hpp"
#include "octic/embedding.hpp"
#include "octic/equiv_linear.hpp"
#include "octic/invariants.hpp"
#include "octic/model.hpp"
#include "octic/norm.hpp"

namespace octic {

std::optional<CheckScope> parse_scope(std::string_view name) {
  if (name == "group") return CheckScope::Group;
  if (name == "layers") return CheckScope::Layers;
  if (name == "model") return CheckScope::Model;
  if (name == "invariants") return CheckScope::Invariants;
  if (name == "all") return CheckScope::All;
  return std::nullopt;
}

double CheckRow::worst() const {
  double w = 0.0;
  for (double r : residual) {
    if (std::isnan(r)) return r;
    w = std::max(w, r);
  }
  return w;
}

bool all_passed(const std::vector<CheckRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.passed(); });
}

namespace {

using Residuals = std::array<double, kGroupOrder>;

void keep_worst(Residuals& acc, const Residuals& r) {
  for (int i = 0; i < kGroupOrder; ++i) acc[i] = std::max(acc[i], r[i]);
}

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Matrix::NullaryExpr(rows, cols, [&] { return n(rng); });
}

Image random_image(int side, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(side);
  for (Eigen::Index i = 0; i < img.pixels.size(); ++i) img.pixels[i] = u(rng);
  return img;
}

void group_suite(std::vector<CheckRow>& rows) {
  CheckRow hom{"group", "irrep homomorphism", {}, true, 1e-13};
  CheckRow reg{"group", "regular homomorphism", {}, true, 1e-13};
  CheckRow conj{"group", "fourier block-diagonalises rho_reg", {}, true, 1e-13};
  const Matrix8d q = fourier_matrix();
  for (auto g : all_elements()) {
    for (auto h : all_elements()) {
      double r = (e_matrix(g) * e_matrix(h) - e_matrix(g * h)).cwiseAbs().maxCoeff();
      for (auto i : {Irrep::A2, Irrep::B1, Irrep::B2}) {
        r = std::max(r, std::abs(double(character(i, g) * character(i, h) - character(i, g * h))));
      }
      hom.residual[g.index()] = std::max(hom.residual[g.index()], r);
      reg.residual[g.index()] = std::max(
          reg.residual[g.index()], (regular_matrix(g) * regular_matrix(h) - regular_matrix(g * h)).cwiseAbs().maxCoeff());
    }
    conj.residual[g.index()] = (q.transpose() * regular_matrix(g) * q - isotypical_matrix(g)).cwiseAbs().maxCoeff();
  }
  CheckRow orth{"group", "fourier orthogonality", {}, false, 1e-13};
  orth.residual[0] = (q * q.transpose() - Matrix8d::Identity()).cwiseAbs().maxCoeff();
  CheckRow fly{"group", "butterfly matches dense transform", {}, false, 1e-13};
  std::mt19937_64 rng(7);
  const Matrix x = random_matrix(8, 1000, rng);
  fly.residual[0] = std::max((isotypical_to_regular(x) - q * x).cwiseAbs().maxCoeff(),
                             (regular_to_isotypical(x) - q.transpose() * x).cwiseAbs().maxCoeff());
  rows.insert(rows.end(), {hom, reg, conj, orth, fly});
}

SteerableFeature random_feature(int channels, int side, bool cls, std::mt19937_64& rng) {
  const GridGeometry geo{side, cls};
  return {random_matrix(channels, geo.tokens(), rng), ChannelRep::IsoMultiple, geo};
}

void layers_suite(std::vector<CheckRow>& rows, const CheckOptions& opt) {
  constexpr double kTol = 1e-11;
  std::mt19937_64 rng(opt.seed + 101);
  const int c = 32;
  const int heads = 2;
  const int side = 4;
  auto lin = EquivLinearWeights::random(c, 24, true, rng);
  EquivNormParams norm;
  norm.gains = random_matrix(kEquivNormGains, 1, rng);
  OcticBlock block = make_octic_block(c, heads, 4 * c, rng);
  block.norm1.gains = random_matrix(kEquivNormGains, 1, rng);
  auto embed = PatchEmbedWeights::random(c, 4, true, rng);
  Matrix pe = reynolds_project_posenc(random_matrix(c, side * side, rng), GridGeometry{side, false});
  Vector cls = project_cls(random_matrix(c, 1, rng));

  struct Named {
    const char* name;
    FeatureMap f;
  };
  const std::vector<Named> maps{
      {"equiv_linear", [&](const SteerableFeature& x) { return equiv_linear_forward(lin, x); }},
      {"equiv_layernorm", [&](const SteerableFeature& x) { return equiv_layernorm(x, norm); }},
      {"equiv_gelu", [&](const SteerableFeature& x) { return equiv_gelu(x); }},
      {"mha", [&](const SteerableFeature& x) { return mha_forward(block, x); }},
      {"block", [&](const SteerableFeature& x) { return block_forward(block, x); }},
  };
  for (const auto& m : maps) {
    CheckRow row{"layers", m.name, {}, true, kTol};
    for (int s = 0; s < opt.samples; ++s) {
      keep_worst(row.residual, equivariance_residuals(m.f, random_feature(c, side, true, rng)));
    }
    rows.push_back(row);
  }
  const std::vector<std::pair<const char*, ImageMap>> image_maps{
      {"patch_embed", [&](const Image& img) { return patch_embed(embed, img); }},
      {"patch_embed+posenc+cls", [&](const Image& img) { return add_posenc_and_cls(patch_embed(embed, img), pe, cls); }},
  };
  for (const auto& [name, f] : image_maps) {
    CheckRow row{"layers", name, {}, true, kTol};
    for (int s = 0; s < opt.samples; ++s) keep_worst(row.residual, equivariance_residuals(f, random_image(16, rng)));
    rows.push_back(row);
  }
  CheckRow kernel{"layers", "patch kernel constraint", {}, false, 1e-12};
  kernel.residual[0] = patch_kernel_violation(embed.w, embed.patch);
  rows.push_back(kernel);
}

void invariants_suite(std::vector<CheckRow>& rows, const CheckOptions& opt) {
  std::mt19937_64 rng(opt.seed + 202);
  const int c = 16;
  InvariantParams p;
  p.templates = random_matrix(2 * c, c, rng);
  p.reference = random_matrix(c, 1, rng);
  for (auto kind : kInvariantKinds) {
    CheckRow row{"invariants", std::string("psi_") + std::string(invariant_name(kind)), {}, true, 1e-12};
    for (int s = 0; s < opt.samples; ++s) {
      const Matrix x = random_matrix(c, 64, rng);
      const Matrix y = psi(kind, p, x);
      const double scale = y.cwiseAbs().maxCoeff() + kResidualEpsilon;
      for (auto g : all_elements()) {
        const double r = (psi(kind, p, apply_iso_action(g, x)) - y).cwiseAbs().maxCoeff() / scale;
        row.residual[g.index()] = std::max(row.residual[g.index()], r);
      }
    }
    rows.push_back(row);
  }
}

void model_suite(std::vector<CheckRow>& rows, const CheckOptions& opt) {
  std::mt19937_64 rng(opt.seed + 303);
  for (auto family : {Family::D8, Family::I8}) {
    ModelConfig cfg;
    cfg.family = family;
    cfg.depth = 2;
    cfg.octic_depth = family == Family::D8 ? 2 : 1;
    cfg.seed = opt.seed;
    const Model m = build_model(cfg);
    const std::string tag(family_name(family));
    CheckRow logits{"model", tag + " logit invariance", {}, true, 1e-9};
    CheckRow features{"model", tag + " octic block equivariance", {}, true, 1e-10};
    for (int s = 0; s < opt.samples; ++s) {
      const Image img = random_image(cfg.image, rng);
      ForwardTrace base;
      const Vector l0 = forward(m, img, &base);
      for (auto g : all_elements()) {
        ForwardTrace moved;
        const Vector l1 = forward(m, transform_image(g, img), &moved);
        logits.residual[g.index()] = std::max(logits.residual[g.index()], (l1 - l0).cwiseAbs().maxCoeff());
        const GridGeometry geo{cfg.grid_side(), true};
        for (std::size_t b = 0; b < base.octic_out.size(); ++b) {
          const SteerableFeature f{base.octic_out[b], ChannelRep::IsoMultiple, geo};
          const Matrix expect = act(g, f).data;
          const double scale = expect.cwiseAbs().maxCoeff() + kResidualEpsilon;
          features.residual[g.index()] = std::max(features.residual[g.index()],
                                                  (moved.octic_out[b] - expect).cwiseAbs().maxCoeff() / scale);
        }
      }
    }
    rows.push_back(logits);
    rows.push_back(features);
    CheckRow constraint{"model", tag + " parameter constraints", {}, false, 1e-10};
    constraint.residual[0] = constraint_violation(m);
    rows.push_back(constraint);
  }
}

}  // namespace

std::vector<CheckRow> run_checks(CheckScope scope, const CheckOptions& opt) {
  std::vector<CheckRow> rows;
  const bool all = scope == CheckScope::All;
  if (all || scope == CheckScope::Group) group_suite(rows);
  if (all || scope == CheckScope::Layers) layers_suite(rows, opt);
  if (all || scope == CheckScope::Invariants) invariants_suite(rows, opt);
  if (all || scope == CheckScope::Model) model_suite(rows, opt);
  return rows;
}

void print_check_report(std::ostream& out, const std::vector<CheckRow>& rows) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-11s %-36s", "suite", "property");
  out << buf;
  for (auto g : all_elements()) {
    std::snprintf(buf, sizeof buf, " %9s", std::string(g.name()).c_str());
    out << buf;
  }
  out << "     worst       tol  status\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-11s %-36s", r.suite.c_str(), r.name.c_str());
    out << buf;
    for (int i = 0; i < kGroupOrder; ++i) {
      if (r.per_element || i == 0) {
        std::snprintf(buf, sizeof buf, " %9.2e", r.residual[i]);
      } else {
        std::snprintf(buf, sizeof buf, " %9s", "-");
      }
      out << buf;
    }
    std::snprintf(buf, sizeof buf, " %9.2e %9.0e  %s\n", r.worst(), r.tolerance, r.passed() ? "ok" : "FAIL");
    out << buf;
  }
}

}  // namespace octic
