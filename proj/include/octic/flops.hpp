#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "octic/model.hpp"

namespace octic {

/// Multiply-accumulate counts (one MAC = one multiply plus one add).
/// `linear` and `attention` are matrix products; `other` collects the
/// element-wise work: layer norms (5 per channel), GELU (1 per hidden unit),
/// softmax (3 per logit), residual adds (1 per channel each), and for octic
/// GELU the two Fourier butterflies (32 ops per 8 hidden units each way).
struct FlopCount {
  double linear = 0.0;
  double attention = 0.0;
  double other = 0.0;

  double matmul() const { return linear + attention; }
  double total() const { return matmul() + other; }
  FlopCount& operator+=(const FlopCount& o);
};

FlopCount operator*(double s, const FlopCount& f);

enum class BlockKind { Standard, Octic };

struct LayerFlops {
  std::string name;
  FlopCount count;
};

struct FlopReport {
  std::vector<LayerFlops> layers;
  FlopCount total;
};

/// One pre-norm transformer block on L tokens of width C with MLP width F.
FlopReport count_block_flops(long C, long H, long L, long F, BlockKind kind);

/// Dense linear C_in -> C_out per token, or its octic counterpart.
double linear_macs(long c_in, long c_out, BlockKind kind);

/// Whole model per image: patch embedding, blocks, invariant head and
/// classifier. Octic blocks count as octic, standard blocks as standard.
FlopReport count_model_flops(const ModelConfig& cfg);

/// The same configuration with every block and the embedding standard.
ModelConfig standard_counterpart(ModelConfig cfg);

struct FlopComparison {
  FlopReport standard;
  FlopReport octic;
  double matmul_ratio() const { return standard.total.matmul() / octic.total.matmul(); }
  double total_ratio() const { return standard.total.total() / octic.total.total(); }
  double linear_ratio() const { return standard.total.linear / octic.total.linear; }
};

FlopComparison compare_block(long C, long H, long L, long F);
FlopComparison compare_model(const ModelConfig& octic_cfg);

/// Named model shapes (vitl, vith, vitg, vite, vit22b) at 224 pixels, patch
/// 14, 1000 classes, all blocks octic (family d8).
struct NamedShape {
  std::string_view name;
  int width, depth, mlp, heads;
  double reference_ratio;
};
const std::vector<NamedShape>& named_shapes();
std::optional<ModelConfig> shape_config(std::string_view name);

}  // namespace octic
