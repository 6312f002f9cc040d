#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "octic/model.hpp"
#include "octic/training.hpp"

namespace octic {

inline constexpr std::string_view kVersion = "0.1.0";

/// Everything a `train` run needs.
///
/// Text form: one `key = value` per line, '#' starts a comment, keys are
/// dotted (model.width, train.lr, data.manifest, ...). Unknown or repeated
/// keys are errors. See README for the key list.
struct RunConfig {
  ModelConfig model;
  TrainOptions train;
  std::string manifest;       ///< training images; empty means synthetic
  std::string eval_manifest;  ///< evaluation images; empty means synthetic
};

/// Throws std::invalid_argument with the offending line number.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Applies a single `key = value` assignment.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

/// Canonical text: every key, fixed order, round-trips through parse_config.
std::string config_text(const RunConfig& cfg);
std::string model_config_text(const ModelConfig& cfg);
ModelConfig parse_model_config(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data);
std::string config_hash(const RunConfig& cfg);

/// "# octic <version> seed=<seed> config=<hash>".
std::string reproducibility_header(const RunConfig& cfg);

}  // namespace octic
