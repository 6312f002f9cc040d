#include "octic/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "octic/config.hpp"

namespace octic {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error(path.string() + ": truncated checkpoint");
  return v;
}

std::string get_string(std::istream& in, std::uint32_t n, const std::filesystem::path& path) {
  if (n > (1u << 24)) throw std::runtime_error(path.string() + ": implausible string length");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw std::runtime_error(path.string() + ": truncated checkpoint");
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Model& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  const std::string cfg = model_config_text(m.config);
  const auto tensors = m.params.tensors(m.config);
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.size()));
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));

  nlohmann::json manifest;
  manifest["format"] = "octic-checkpoint";
  manifest["version"] = kCheckpointVersion;
  manifest["config"] = cfg;
  manifest["tensors"] = nlohmann::json::array();
  for (const auto& t : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.path.size()));
    out.write(t.path.data(), static_cast<std::streamsize>(t.path.size()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(t.rows));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(t.cols));
    manifest["tensors"].push_back({{"path", t.path},
                                   {"rows", t.rows},
                                   {"cols", t.cols},
                                   {"offset", static_cast<std::uint64_t>(out.tellp())}});
    out.write(reinterpret_cast<const char*>(t.data), static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");

  std::ofstream js(path.string() + ".json");
  if (!js) throw std::runtime_error(path.string() + ".json: cannot open for writing");
  js << manifest.dump(2) << '\n';
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open checkpoint");
  char magic[sizeof kCheckpointMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw std::runtime_error(path.string() + ": not an octic checkpoint");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw std::runtime_error(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto cfg_text = get_string(in, get<std::uint32_t>(in, path), path);
  Model m = build_model(parse_model_config(cfg_text));
  auto tensors = m.params.tensors(m.config);
  const auto count = get<std::uint32_t>(in, path);
  if (count != tensors.size()) {
    throw std::runtime_error(path.string() + ": expected " + std::to_string(tensors.size()) + " tensors, found " +
                             std::to_string(count));
  }
  for (auto& t : tensors) {
    const auto name = get_string(in, get<std::uint32_t>(in, path), path);
    const auto rows = get<std::uint64_t>(in, path);
    const auto cols = get<std::uint64_t>(in, path);
    if (name != t.path) throw std::runtime_error(path.string() + ": expected tensor " + t.path + ", found " + name);
    if (rows != static_cast<std::uint64_t>(t.rows) || cols != static_cast<std::uint64_t>(t.cols)) {
      throw std::runtime_error(path.string() + ": shape mismatch for " + name);
    }
    in.read(reinterpret_cast<char*>(t.data), static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!in) throw std::runtime_error(path.string() + ": truncated data for " + name);
  }
  return m;
}

}  // namespace octic
