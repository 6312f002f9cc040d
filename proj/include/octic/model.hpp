#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "octic/attention.hpp"
#include "octic/embedding.hpp"
#include "octic/invariants.hpp"

namespace octic {

/// Standard: plain ViT. D8: octic throughout, invariant head before the
/// classifier. I8: k octic blocks, invariant head, l-k standard blocks.
/// H8: k octic blocks whose output is read as plain channels by l-k
/// standard blocks.
enum class Family { Standard, D8, I8, H8 };

std::string_view family_name(Family f);
std::optional<Family> parse_family(std::string_view name);

struct ModelConfig {
  Family family = Family::D8;
  int depth = 2;
  int octic_depth = 2;
  int width = 16;
  int heads = 1;
  int patch = 4;
  int image = 16;
  int classes = 8;
  int mlp_dim = 0;  ///< 0 means 4 * width
  InvariantKind invariant = InvariantKind::PowerSpectrum;
  std::uint64_t seed = 0;

  int hidden() const { return mlp_dim > 0 ? mlp_dim : 4 * width; }
  int standard_depth() const { return depth - octic_depth; }
  int grid_side() const { return image / patch; }
  int tokens() const { return grid_side() * grid_side() + 1; }
  bool octic_embedding() const { return family != Family::Standard; }
  bool has_invariant_head() const { return family == Family::D8 || family == Family::I8; }

  /// Throws std::invalid_argument describing the first violated rule.
  void validate() const;
};

struct ModelParams {
  PatchEmbedWeights embed;
  Matrix posenc;  ///< C x N^2
  Vector cls;
  std::vector<OcticBlock> octic_blocks;
  std::vector<StandardBlock> standard_blocks;
  EquivNormParams head_norm;  ///< D8/I8: applied right before the invariant head
  InvariantHead head;         ///< D8/I8 only
  StdNormParams final_norm;   ///< Standard/I8/H8
  DenseLinear classifier;

  /// Every learnable tensor, keyed by layer path, in a fixed order.
  TensorList tensors(const ModelConfig& cfg);
};

struct Model {
  ModelConfig config;
  ModelParams params;

  std::int64_t parameter_count();
};

/// Seeded initialisation; octic parameters start on their constraint sets.
Model build_model(const ModelConfig& cfg);

ModelParams zeros_like(const ModelConfig& cfg, const ModelParams& p);

/// Reynolds-project the constrained tensors (patch kernel, positional
/// encoding, class token). Applied to parameters after every update and to
/// raw gradients before they are used.
void project_constrained(const ModelConfig& cfg, ModelParams& p);

/// Largest violation of the octic parameter constraints (0 for Standard).
double constraint_violation(const Model& m);

/// Intermediate values of one forward pass.
struct ForwardTrace {
  Matrix patches;
  Matrix embedded;  ///< C x N^2 patch embedding
  Matrix tokens;    ///< with positional encoding and class token
  std::vector<BlockCache> octic;
  std::vector<Matrix> octic_out;
  NormCache head_norm_cache;
  Matrix head_in;
  InvariantHeadCache head;
  Matrix head_out;
  std::vector<BlockCache> standard;
  std::vector<Matrix> standard_out;
  NormCache final_norm_cache;
  Matrix final_out;
  Vector cls;
  Vector logits;
};

Vector forward(const Model& m, const Image& image, ForwardTrace* trace = nullptr);
ModelParams backward(const Model& m, const ForwardTrace& trace, const Vector& dlogits);

/// Softmax cross-entropy; fills dlogits when given.
double cross_entropy(const Vector& logits, int label, Vector* dlogits = nullptr);

struct Sample {
  Image image;
  int label = 0;
};

struct LossAndGrad {
  double loss = 0.0;  ///< batch mean
  int correct = 0;
  ModelParams grad;   ///< gradient of the batch mean, projected
};

/// Sequential; see training.hpp for the threaded version.
LossAndGrad loss_and_grad(const Model& m, const std::vector<Sample>& batch);

int predict(const Vector& logits);

}  // namespace octic
