#include "octic/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace octic {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("bad value '" + std::string(v) + "' for " + std::string(key));
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(std::string(v), &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("bad value '" + std::string(v) + "' for " + std::string(key));
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("bad value '" + std::string(v) + "' for " + std::string(key));
}

std::string fmt_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

bool set_model_value(ModelConfig& m, std::string_view key, std::string_view v) {
  if (key == "model.family") {
    const auto f = parse_family(v);
    if (!f) throw std::invalid_argument("unknown family '" + std::string(v) + "' (standard, d8, i8, h8)");
    m.family = *f;
  } else if (key == "model.depth") {
    m.depth = parse_number<int>(key, v);
  } else if (key == "model.octic_depth") {
    m.octic_depth = parse_number<int>(key, v);
  } else if (key == "model.width") {
    m.width = parse_number<int>(key, v);
  } else if (key == "model.heads") {
    m.heads = parse_number<int>(key, v);
  } else if (key == "model.patch") {
    m.patch = parse_number<int>(key, v);
  } else if (key == "model.image") {
    m.image = parse_number<int>(key, v);
  } else if (key == "model.classes") {
    m.classes = parse_number<int>(key, v);
  } else if (key == "model.mlp_dim") {
    m.mlp_dim = parse_number<int>(key, v);
  } else if (key == "model.invariant") {
    const auto k = parse_invariant(v);
    if (!k) throw std::invalid_argument("unknown invariant '" + std::string(v) + "'");
    m.invariant = *k;
  } else if (key == "seed") {
    m.seed = parse_number<std::uint64_t>(key, v);
  } else {
    return false;
  }
  return true;
}

template <class Setter>
void parse_lines(std::string_view text, Setter&& set) {
  std::set<std::string, std::less<>> seen;
  int lineno = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (eq == std::string_view::npos) throw std::invalid_argument(where + "expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(where + "missing key");
    if (!seen.insert(std::string(key)).second) throw std::invalid_argument(where + "duplicate key " + std::string(key));
    try {
      set(key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + e.what());
    }
  }
}

}  // namespace

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view v) {
  if (set_model_value(cfg.model, key, v)) return;
  TrainOptions& t = cfg.train;
  if (key == "train.steps") {
    t.steps = parse_number<int>(key, v);
  } else if (key == "train.batch") {
    t.batch = parse_number<int>(key, v);
  } else if (key == "train.lr") {
    t.lr = parse_double(key, v);
  } else if (key == "train.momentum") {
    t.momentum = parse_double(key, v);
  } else if (key == "train.beta2") {
    t.beta2 = parse_double(key, v);
  } else if (key == "train.optimizer") {
    if (v == "sgd") {
      t.optimizer = Optimizer::Sgd;
    } else if (v == "adam") {
      t.optimizer = Optimizer::Adam;
    } else {
      throw std::invalid_argument("unknown optimizer '" + std::string(v) + "' (sgd, adam)");
    }
  } else if (key == "train.eval_every") {
    t.eval_every = parse_number<int>(key, v);
  } else if (key == "train.eval_size") {
    t.eval_size = parse_number<int>(key, v);
  } else if (key == "train.data_seed") {
    t.data_seed = parse_number<std::uint64_t>(key, v);
  } else if (key == "data.max_shift") {
    t.data.max_shift = parse_number<int>(key, v);
  } else if (key == "data.noise") {
    t.data.noise = parse_double(key, v);
  } else if (key == "data.random_pose") {
    t.data.random_pose = parse_bool(key, v);
  } else if (key == "data.manifest") {
    cfg.manifest = std::string(v);
  } else if (key == "data.eval_manifest") {
    cfg.eval_manifest = std::string(v);
  } else {
    throw std::invalid_argument("unknown key " + std::string(key));
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  parse_lines(text, [&](std::string_view k, std::string_view v) { set_config_value(cfg, k, v); });
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string model_config_text(const ModelConfig& m) {
  std::ostringstream out;
  out << "model.family = " << family_name(m.family) << '\n'
      << "model.depth = " << m.depth << '\n'
      << "model.octic_depth = " << m.octic_depth << '\n'
      << "model.width = " << m.width << '\n'
      << "model.heads = " << m.heads << '\n'
      << "model.patch = " << m.patch << '\n'
      << "model.image = " << m.image << '\n'
      << "model.classes = " << m.classes << '\n'
      << "model.mlp_dim = " << m.mlp_dim << '\n'
      << "model.invariant = " << invariant_name(m.invariant) << '\n'
      << "seed = " << m.seed << '\n';
  return out.str();
}

ModelConfig parse_model_config(std::string_view text) {
  ModelConfig m;
  parse_lines(text, [&](std::string_view k, std::string_view v) {
    if (!set_model_value(m, k, v)) throw std::invalid_argument("unknown key " + std::string(k));
  });
  return m;
}

std::string config_text(const RunConfig& cfg) {
  const TrainOptions& t = cfg.train;
  std::ostringstream out;
  out << model_config_text(cfg.model)
      << "train.steps = " << t.steps << '\n'
      << "train.batch = " << t.batch << '\n'
      << "train.lr = " << fmt_double(t.lr) << '\n'
      << "train.momentum = " << fmt_double(t.momentum) << '\n'
      << "train.beta2 = " << fmt_double(t.beta2) << '\n'
      << "train.optimizer = " << (t.optimizer == Optimizer::Sgd ? "sgd" : "adam") << '\n'
      << "train.eval_every = " << t.eval_every << '\n'
      << "train.eval_size = " << t.eval_size << '\n'
      << "train.data_seed = " << t.data_seed << '\n'
      << "data.max_shift = " << t.data.max_shift << '\n'
      << "data.noise = " << fmt_double(t.data.noise) << '\n'
      << "data.random_pose = " << (t.data.random_pose ? "true" : "false") << '\n';
  if (!cfg.manifest.empty()) out << "data.manifest = " << cfg.manifest << '\n';
  if (!cfg.eval_manifest.empty()) out << "data.eval_manifest = " << cfg.eval_manifest << '\n';
  return out.str();
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_text(cfg))));
  return buf;
}

std::string reproducibility_header(const RunConfig& cfg) {
  return "# octic " + std::string(kVersion) + " seed=" + std::to_string(cfg.model.seed) +
         " config=" + config_hash(cfg);
}

}  // namespace octic
