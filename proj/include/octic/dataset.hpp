#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "octic/model.hpp"

namespace octic {

inline constexpr int kSyntheticClasses = 8;

/// bar, ell, tee, cross, square, frame, notched_disk, dots.
std::string_view shape_name(int label);

struct SyntheticOptions {
  int image = 16;
  int max_shift = 2;        ///< uniform integer translation in [-max_shift, max_shift], both axes
  double noise = 0.05;      ///< additive Gaussian pixel noise
  bool random_pose = false; ///< apply a uniformly drawn D8 element to each sample
};

/// Draws one shape. The drawn silhouettes are pairwise inequivalent under
/// D8, so the label is a function of the D8 orbit of the image.
Image render_shape(int label, const SyntheticOptions& opt, std::mt19937_64& rng);

/// `count` samples with labels cycling 0..7, fully determined by the seed.
std::vector<Sample> synthetic_dataset(int count, const SyntheticOptions& opt, std::uint64_t seed);

}  // namespace octic
