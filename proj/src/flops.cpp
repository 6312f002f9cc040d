#include "octic/flops.hpp"

namespace octic {

FlopCount& FlopCount::operator+=(const FlopCount& o) {
  linear += o.linear;
  attention += o.attention;
  other += o.other;
  return *this;
}

FlopCount operator*(double s, const FlopCount& f) { return {s * f.linear, s * f.attention, s * f.other}; }

double linear_macs(long c_in, long c_out, BlockKind kind) {
  const double dense = static_cast<double>(c_in) * c_out;
  return kind == BlockKind::Octic ? dense * 3.0 / 16.0 : dense;
}

namespace {

constexpr double kNormOpsPerChannel = 5.0;
constexpr double kSoftmaxOpsPerLogit = 3.0;
constexpr double kButterflyOpsPerChannel = 4.0;  // (24 adds + 8 mults) / 8

void add(FlopReport& r, std::string name, FlopCount c) {
  r.total += c;
  r.layers.push_back({std::move(name), c});
}

}  // namespace

FlopReport count_block_flops(long C, long H, long L, long F, BlockKind kind) {
  const double l = static_cast<double>(L);
  FlopReport r;
  add(r, "norm1", {0, 0, kNormOpsPerChannel * C * l});
  add(r, "qkv", {3 * linear_macs(C, C, kind) * l, 0, 0});
  add(r, "attn.logits", {0, l * l * C, 0});
  add(r, "attn.softmax", {0, 0, kSoftmaxOpsPerLogit * H * l * l});
  add(r, "attn.values", {0, l * l * C, 0});
  add(r, "attn.out", {linear_macs(C, C, kind) * l, 0, 0});
  add(r, "residual1", {0, 0, static_cast<double>(C) * l});
  add(r, "norm2", {0, 0, kNormOpsPerChannel * C * l});
  add(r, "mlp.fc1", {linear_macs(C, F, kind) * l, 0, 0});
  double act = static_cast<double>(F) * l;
  if (kind == BlockKind::Octic) act += 2 * kButterflyOpsPerChannel * F * l;
  add(r, "mlp.gelu", {0, 0, act});
  add(r, "mlp.fc2", {linear_macs(F, C, kind) * l, 0, 0});
  add(r, "residual2", {0, 0, static_cast<double>(C) * l});
  return r;
}

ModelConfig standard_counterpart(ModelConfig cfg) {
  cfg.family = Family::Standard;
  cfg.octic_depth = 0;
  return cfg;
}

FlopReport count_model_flops(const ModelConfig& cfg) {
  cfg.validate();
  const long C = cfg.width;
  const long L = cfg.tokens();
  const long n2 = L - 1;
  const BlockKind embed = cfg.octic_embedding() ? BlockKind::Octic : BlockKind::Standard;
  FlopReport r;
  add(r, "embed", {linear_macs(3L * cfg.patch * cfg.patch, C, embed) * n2, 0, 0});
  auto add_block = [&](const std::string& name, BlockKind kind) {
    const FlopReport b = count_block_flops(C, cfg.heads, L, cfg.hidden(), kind);
    add(r, name, b.total);
  };
  for (int i = 0; i < cfg.octic_depth; ++i) add_block("octic." + std::to_string(i), BlockKind::Octic);
  if (cfg.has_invariant_head()) {
    const double k = invariant_dim(cfg.invariant, cfg.width);
    // Only the class token's invariant features reach the classifier.
    add(r, "head", {k * C + static_cast<double>(C) * C, 0, (kNormOpsPerChannel + 2.0) * C});
  }
  for (int i = 0; i < cfg.standard_depth(); ++i) add_block("standard." + std::to_string(i), BlockKind::Standard);
  if (cfg.family != Family::D8) add(r, "final_norm", {0, 0, kNormOpsPerChannel * C * L});
  add(r, "classifier", {static_cast<double>(C) * cfg.classes, 0, 0});
  return r;
}

FlopComparison compare_block(long C, long H, long L, long F) {
  return {count_block_flops(C, H, L, F, BlockKind::Standard), count_block_flops(C, H, L, F, BlockKind::Octic)};
}

FlopComparison compare_model(const ModelConfig& octic_cfg) {
  return {count_model_flops(standard_counterpart(octic_cfg)), count_model_flops(octic_cfg)};
}

const std::vector<NamedShape>& named_shapes() {
  static const std::vector<NamedShape> shapes{
      {"vitl", 1024, 24, 4096, 16, 4.58},  {"vith", 1280, 32, 5120, 16, 4.58},
      {"vitg", 1664, 48, 8192, 16, 4.88},  {"vite", 1792, 56, 15360, 16, 5.01},
      {"vit22b", 6144, 36, 24576, 48, 5.18},
  };
  return shapes;
}

std::optional<ModelConfig> shape_config(std::string_view name) {
  for (const auto& s : named_shapes()) {
    if (s.name != name) continue;
    ModelConfig cfg;
    cfg.family = Family::D8;
    cfg.width = s.width;
    cfg.depth = s.depth;
    cfg.octic_depth = s.depth;
    cfg.mlp_dim = s.mlp;
    cfg.heads = s.heads;
    cfg.patch = 14;
    cfg.image = 224;
    cfg.classes = 1000;
    cfg.invariant = InvariantKind::PowerSpectrum;
    return cfg;
  }
  return std::nullopt;
}

}  // namespace octic
