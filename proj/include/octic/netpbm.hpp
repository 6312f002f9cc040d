#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "octic/embedding.hpp"
#include "octic/model.hpp"

namespace octic {

/// Binary Netpbm raster: P5 (1 channel) or P6 (3 channels), maxval up to
/// 65535. Samples are stored row-major, channels interleaved.
struct NetpbmImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  int maxval = 255;
  std::vector<std::uint16_t> samples;
};

/// Throws std::runtime_error on IO or format errors.
NetpbmImage read_netpbm(const std::filesystem::path& path);
void write_netpbm(const std::filesystem::path& path, const NetpbmImage& image);

/// Square raster to a 3-plane image with values in [0, 1]; grayscale is
/// replicated to all planes.
Image to_image(const NetpbmImage& raster);

/// Manifest lines are `relative-path,integer-label`, resolved against the
/// manifest's directory. Blank lines and lines starting with '#' are skipped.
std::vector<Sample> load_manifest(const std::filesystem::path& manifest);

/// 8-bit P5 image of a P x P kernel plane, min-max normalised to 0..255.
/// A constant plane maps to 128.
NetpbmImage kernel_plane_to_pgm(const Matrix& plane);

/// Writes every patch-embedding kernel row as three P x P planes named
/// <block>_<index>_c<channel>.pgm, e.g. A1_003_c0.pgm (block is the iso
/// component for octic kernels, "ch" otherwise). Returns the written paths.
std::vector<std::filesystem::path> dump_filters(const PatchEmbedWeights& w, const std::filesystem::path& dir);

}  // namespace octic
