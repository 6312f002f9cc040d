#include "octic/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace octic {

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Standard: return "standard";
    case Family::D8: return "d8";
    case Family::I8: return "i8";
    case Family::H8: return "h8";
  }
  return "?";
}

std::optional<Family> parse_family(std::string_view name) {
  for (auto f : {Family::Standard, Family::D8, Family::I8, Family::H8}) {
    if (family_name(f) == name) return f;
  }
  return std::nullopt;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("invalid model config: " + msg); };
  if (depth < 0 || octic_depth < 0) fail("depths must be non-negative");
  if (octic_depth > depth) fail("octic_depth (" + std::to_string(octic_depth) + ") exceeds depth (" +
                                std::to_string(depth) + ")");
  if (family == Family::D8 && octic_depth != depth) fail("family d8 requires octic_depth = depth");
  if (family == Family::Standard && octic_depth != 0) fail("family standard requires octic_depth = 0");
  if (width <= 0 || heads <= 0 || patch <= 0 || image <= 0 || classes <= 0) fail("sizes must be positive");
  if (image % patch != 0) fail("patch " + std::to_string(patch) + " does not divide image " + std::to_string(image));
  if (octic_embedding() && width % 8 != 0) fail("octic width must be a multiple of 8");
  if (octic_depth > 0 && width % (8 * heads) != 0) fail("octic blocks need 8 * heads to divide width");
  if (standard_depth() > 0 && width % heads != 0) fail("heads must divide width");
  if (octic_depth > 0 && hidden() % 8 != 0) fail("octic MLP width must be a multiple of 8");
}

TensorList ModelParams::tensors(const ModelConfig& cfg) {
  TensorList out;
  embed.collect("embed", out);
  register_tensor(out, "posenc", posenc);
  register_tensor(out, "cls", cls);
  for (std::size_t i = 0; i < octic_blocks.size(); ++i) octic_blocks[i].collect("octic." + std::to_string(i), out);
  if (cfg.has_invariant_head()) {
    head_norm.collect("head_norm", out);
    head.collect("head", out);
  }
  for (std::size_t i = 0; i < standard_blocks.size(); ++i) {
    standard_blocks[i].collect("standard." + std::to_string(i), out);
  }
  if (cfg.family != Family::D8) final_norm.collect("final_norm", out);
  classifier.collect("classifier", out);
  return out;
}

std::int64_t Model::parameter_count() {
  std::int64_t n = 0;
  for (const auto& t : params.tensors(config)) n += t.size();
  return n;
}

Model build_model(const ModelConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const int c = cfg.width;
  Model m{cfg, {}};
  ModelParams& p = m.params;
  p.embed = PatchEmbedWeights::random(c, cfg.patch, cfg.octic_embedding(), rng);
  std::uniform_real_distribution<double> small(-0.02, 0.02);
  const int n2 = cfg.grid_side() * cfg.grid_side();
  p.posenc = Matrix::NullaryExpr(c, n2, [&] { return small(rng); });
  p.cls = Vector::NullaryExpr(c, [&] { return small(rng); });
  for (int i = 0; i < cfg.octic_depth; ++i) p.octic_blocks.push_back(make_octic_block(c, cfg.heads, cfg.hidden(), rng));
  if (cfg.has_invariant_head()) p.head = InvariantHead::make(cfg.invariant, c, rng);
  for (int i = 0; i < cfg.standard_depth(); ++i) {
    p.standard_blocks.push_back(make_standard_block(c, cfg.heads, cfg.hidden(), rng));
  }
  p.final_norm = StdNormParams::identity(c);
  p.classifier = DenseLinear::random(c, cfg.classes, true, rng);
  project_constrained(cfg, p);
  return m;
}

ModelParams zeros_like(const ModelConfig& cfg, const ModelParams& p) {
  ModelParams z;
  z.embed = PatchEmbedWeights::zeros(p.embed.channels(), p.embed.patch, p.embed.octic);
  z.posenc = Matrix::Zero(p.posenc.rows(), p.posenc.cols());
  z.cls = Vector::Zero(p.cls.size());
  for (const auto& b : p.octic_blocks) z.octic_blocks.push_back(zeros_like(b));
  for (const auto& b : p.standard_blocks) z.standard_blocks.push_back(zeros_like(b));
  z.head_norm.gains.setZero();
  if (cfg.has_invariant_head()) z.head = InvariantHead::zeros_like(p.head);
  z.final_norm = {Vector::Zero(p.final_norm.gamma.size()), Vector::Zero(p.final_norm.beta.size())};
  z.classifier = DenseLinear::zeros(p.classifier.in_channels(), p.classifier.out_channels(), p.classifier.has_bias());
  return z;
}

void project_constrained(const ModelConfig& cfg, ModelParams& p) {
  if (!cfg.octic_embedding()) return;
  p.embed.project();
  p.posenc = reynolds_project_posenc(p.posenc, GridGeometry{cfg.grid_side(), false});
  p.cls = project_cls(p.cls);
}

double constraint_violation(const Model& m) {
  if (!m.config.octic_embedding()) return 0.0;
  const auto& p = m.params;
  double v = patch_kernel_violation(p.embed.w, p.embed.patch);
  v = std::max(v, posenc_constraint_violation(p.posenc, GridGeometry{m.config.grid_side(), false}));
  v = std::max(v, (p.cls - project_cls(p.cls)).cwiseAbs().maxCoeff());
  return v;
}

Vector forward(const Model& m, const Image& image, ForwardTrace* trace) {
  const ModelConfig& cfg = m.config;
  const ModelParams& p = m.params;
  if (image.size != cfg.image) {
    throw std::invalid_argument("image is " + std::to_string(image.size) + " pixels wide, model expects " +
                                std::to_string(cfg.image));
  }
  ForwardTrace local;
  ForwardTrace& t = trace ? *trace : local;
  t.patches = patchify(image, cfg.patch);
  t.embedded = patch_embed_forward(p.embed, t.patches);
  t.tokens = add_posenc_and_cls(t.embedded, p.posenc, p.cls, cfg.octic_embedding());

  t.octic.assign(p.octic_blocks.size(), {});
  t.octic_out.clear();
  Matrix x = t.tokens;
  for (std::size_t i = 0; i < p.octic_blocks.size(); ++i) {
    x = block_forward(p.octic_blocks[i], x, &t.octic[i]);
    t.octic_out.push_back(x);
  }
  if (cfg.has_invariant_head()) {
    t.head_in = norm_forward(p.head_norm, x, &t.head_norm_cache);
    t.head_out = invariant_head_forward(p.head, t.head_in, &t.head);
    x = t.head_out;
  }
  t.standard.assign(p.standard_blocks.size(), {});
  t.standard_out.clear();
  for (std::size_t i = 0; i < p.standard_blocks.size(); ++i) {
    x = block_forward(p.standard_blocks[i], x, &t.standard[i]);
    t.standard_out.push_back(x);
  }
  if (cfg.family != Family::D8) x = norm_forward(p.final_norm, x, &t.final_norm_cache);
  t.final_out = x;
  t.cls = x.col(x.cols() - 1);
  t.logits = dense_forward(p.classifier, t.cls);
  return t.logits;
}

ModelParams backward(const Model& m, const ForwardTrace& t, const Vector& dlogits) {
  const ModelConfig& cfg = m.config;
  const ModelParams& p = m.params;
  ModelParams g = zeros_like(cfg, p);

  auto gc = dense_vjp(p.classifier, t.cls, dlogits);
  g.classifier = std::move(gc.weights);
  Matrix dx = Matrix::Zero(t.final_out.rows(), t.final_out.cols());
  dx.col(dx.cols() - 1) = gc.input;

  if (cfg.family != Family::D8) {
    auto gn = norm_vjp(p.final_norm, t.final_norm_cache, dx);
    g.final_norm = std::move(gn.params);
    dx = std::move(gn.input);
  }
  for (std::size_t i = p.standard_blocks.size(); i-- > 0;) {
    auto gb = block_vjp(p.standard_blocks[i], t.standard[i], dx);
    g.standard_blocks[i] = std::move(gb.params);
    dx = std::move(gb.input);
  }
  if (cfg.has_invariant_head()) {
    auto gh = invariant_head_vjp(p.head, t.head, dx);
    g.head = std::move(gh.params);
    auto gn = norm_vjp(p.head_norm, t.head_norm_cache, gh.input);
    g.head_norm = std::move(gn.params);
    dx = std::move(gn.input);
  }
  for (std::size_t i = p.octic_blocks.size(); i-- > 0;) {
    auto gb = block_vjp(p.octic_blocks[i], t.octic[i], dx);
    g.octic_blocks[i] = std::move(gb.params);
    dx = std::move(gb.input);
  }
  const Eigen::Index n2 = t.embedded.cols();
  g.cls = dx.col(n2);
  g.posenc = dx.leftCols(n2);
  g.embed = patch_embed_vjp(p.embed, t.patches, dx.leftCols(n2));
  return g;
}

double cross_entropy(const Vector& logits, int label, Vector* dlogits) {
  if (label < 0 || label >= logits.size()) throw std::invalid_argument("label out of range");
  const double mx = logits.maxCoeff();
  const Vector e = (logits.array() - mx).exp().matrix();
  const double z = e.sum();
  if (dlogits) {
    *dlogits = e / z;
    (*dlogits)[label] -= 1.0;
  }
  return std::log(z) + mx - logits[label];
}

int predict(const Vector& logits) {
  Eigen::Index best = 0;
  logits.maxCoeff(&best);
  return static_cast<int>(best);
}

LossAndGrad loss_and_grad(const Model& m, const std::vector<Sample>& batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  LossAndGrad out{0.0, 0, zeros_like(m.config, m.params)};
  ModelParams& acc = out.grad;
  auto acc_list = acc.tensors(m.config);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& s : batch) {
    ForwardTrace t;
    const Vector logits = forward(m, s.image, &t);
    Vector dlogits;
    out.loss += scale * cross_entropy(logits, s.label, &dlogits);
    out.correct += predict(logits) == s.label ? 1 : 0;
    ModelParams g = backward(m, t, dlogits);
    auto list = g.tensors(m.config);
    for (std::size_t i = 0; i < list.size(); ++i) acc_list[i].map() += scale * list[i].map();
  }
  project_constrained(m.config, acc);
  return out;
}

}  // namespace octic
