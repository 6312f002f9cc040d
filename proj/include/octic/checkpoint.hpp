#pragma once

#include <cstdint>
#include <filesystem>

#include "octic/model.hpp"

namespace octic {

/// Binary container, all integers little-endian:
///
///   magic "OCTICKPT" | u32 version | u32 config bytes | config text
///   u32 tensor count, then per tensor:
///   u32 path bytes | path | u64 rows | u64 cols | rows*cols f64, column-major
///
/// The config text is the `key = value` model description. A JSON manifest
/// with the same tensor list (path, shape, byte offset) is written next to
/// the container as <file>.json.
inline constexpr char kCheckpointMagic[8] = {'O', 'C', 'T', 'I', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, Model& m);

/// Rebuilds the model from the embedded config and overwrites every tensor.
/// Throws std::runtime_error on format, shape or path mismatches.
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace octic
