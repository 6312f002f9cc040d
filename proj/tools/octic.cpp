#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "octic/bench.hpp"
#include "octic/check.hpp"
#include "octic/checkpoint.hpp"
#include "octic/config.hpp"
#include "octic/dataset.hpp"
#include "octic/fault.hpp"
#include "octic/flops.hpp"
#include "octic/intensity.hpp"
#include "octic/netpbm.hpp"
#include "octic/parallel.hpp"
#include "octic/training.hpp"

namespace {

using namespace octic;
using nlohmann::json;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Header for commands that have no RunConfig: the hash covers the options.
std::string header(std::uint64_t seed, const std::string& options) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(options)));
  return "# octic " + std::string(kVersion) + " seed=" + std::to_string(seed) + " config=" + hash;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int cmd_check(const std::string& scope_name, std::uint64_t seed, int samples, const std::string& fault_name) {
  const auto scope = parse_scope(scope_name);
  if (!scope) throw CLI::ValidationError("--scope", "expected group, layers, model, invariants or all");
  const auto fault = parse_fault(fault_name);
  if (!fault) throw CLI::ValidationError("--inject-fault", "expected none, rho-e-sign or unshared-e");
  ScopedFault guard(*fault);
  std::cout << header(seed, "check " + scope_name + " " + std::to_string(samples) + " " + fault_name) << '\n';
  const auto rows = run_checks(*scope, {seed, samples});
  print_check_report(std::cout, rows);
  const bool ok = all_passed(rows);
  std::cout << (ok ? "all properties hold\n" : "property violations found\n");
  return ok ? 0 : kExitFailure;
}

void print_flops_row(const std::string& name, const ModelConfig& cfg, const FlopComparison& cmp, double reference,
                     bool as_json) {
  const double ratio = cmp.matmul_ratio();
  const bool have_ref = reference > 0;
  if (as_json) {
    json j{{"model", name},
           {"width", cfg.width},
           {"depth", cfg.depth},
           {"mlp", cfg.hidden()},
           {"heads", cfg.heads},
           {"tokens", cfg.tokens()},
           {"standard_macs", cmp.standard.total.matmul()},
           {"octic_macs", cmp.octic.total.matmul()},
           {"matmul_ratio", ratio},
           {"total_ratio", cmp.total_ratio()},
           {"linear_ratio", cmp.linear_ratio()}};
    if (have_ref) {
      j["reference"] = reference;
      j["within_0.25"] = std::abs(ratio - reference) <= 0.25;
    }
    std::cout << j.dump() << '\n';
    return;
  }
  std::cout << name << ',' << cfg.width << ',' << cfg.depth << ',' << cfg.hidden() << ',' << cfg.heads << ','
            << cfg.tokens() << ',' << fmt(cmp.standard.total.matmul()) << ',' << fmt(cmp.octic.total.matmul()) << ','
            << fmt(ratio) << ',' << fmt(cmp.total_ratio()) << ',' << fmt(cmp.linear_ratio()) << ','
            << (have_ref ? fmt(reference) : "") << ','
            << (have_ref ? (std::abs(ratio - reference) <= 0.25 ? "yes" : "no") : "") << '\n';
}

void print_breakdown(const FlopComparison& cmp, bool as_json) {
  for (std::size_t i = 0; i < cmp.standard.layers.size(); ++i) {
    const auto& s = cmp.standard.layers[i];
    const auto& o = cmp.octic.layers[i];
    if (as_json) {
      std::cout << json{{"layer", s.name},
                        {"standard", {{"linear", s.count.linear}, {"attention", s.count.attention}, {"other", s.count.other}}},
                        {"octic", {{"linear", o.count.linear}, {"attention", o.count.attention}, {"other", o.count.other}}}}
                       .dump()
                << '\n';
    } else {
      std::cout << "# " << s.name << ": standard linear=" << fmt(s.count.linear) << " attention="
                << fmt(s.count.attention) << " other=" << fmt(s.count.other) << " | octic linear="
                << fmt(o.count.linear) << " attention=" << fmt(o.count.attention) << " other=" << fmt(o.count.other)
                << '\n';
    }
  }
}

int cmd_flops(const std::string& shape, const std::string& config_path, const std::vector<int>& sweep, int tokens,
              bool breakdown, bool as_json) {
  std::cout << header(0, "flops " + shape + " " + config_path + " " + std::to_string(tokens)) << '\n';
  if (!as_json) {
    std::cout << "# MACs per image (multiply-accumulates, factor 2 omitted); ratio = standard / octic matrix-product"
                 " MACs, total_ratio adds element-wise ops; reference values are compared within +-0.25\n";
  }
  if (!sweep.empty()) {
    if (!as_json) std::cout << "width,tokens,matmul_ratio,total_ratio,linear_ratio\n";
    for (int c : sweep) {
      const auto cmp = compare_block(c, std::max(1, c / 64), tokens, 4L * c);
      if (as_json) {
        std::cout << json{{"width", c}, {"tokens", tokens}, {"matmul_ratio", cmp.matmul_ratio()},
                          {"total_ratio", cmp.total_ratio()}, {"linear_ratio", cmp.linear_ratio()}}
                         .dump()
                  << '\n';
      } else {
        std::cout << c << ',' << tokens << ',' << fmt(cmp.matmul_ratio()) << ',' << fmt(cmp.total_ratio()) << ','
                  << fmt(cmp.linear_ratio()) << '\n';
      }
    }
    return 0;
  }
  if (!as_json) {
    std::cout << "model,width,depth,mlp,heads,tokens,standard_macs,octic_macs,ratio,total_ratio,linear_ratio,"
                 "reference,within_tolerance\n";
  }
  if (!config_path.empty()) {
    const ModelConfig cfg = load_config(config_path).model;
    if (cfg.family == Family::Standard) throw std::invalid_argument("flops needs an octic family to compare against");
    const auto cmp = compare_model(cfg);
    print_flops_row(config_path, cfg, cmp, 0.0, as_json);
    if (breakdown) print_breakdown(cmp, as_json);
    return 0;
  }
  bool matched = false;
  for (const auto& s : named_shapes()) {
    if (shape != "all" && shape != s.name) continue;
    matched = true;
    const ModelConfig cfg = *shape_config(s.name);
    const auto cmp = compare_model(cfg);
    print_flops_row(std::string(s.name), cfg, cmp, s.reference_ratio, as_json);
    if (breakdown) print_breakdown(cmp, as_json);
  }
  if (!matched) throw CLI::ValidationError("--shape", "expected vitl, vith, vitg, vite, vit22b or all");
  return 0;
}

int cmd_intensity(double B, double P, double f_ratio, double C, const std::string& sweep, int points, bool as_json) {
  std::cout << header(0, "intensity " + fmt(B) + " " + fmt(P) + " " + fmt(f_ratio) + " " + sweep) << '\n';
  double lo = C, hi = C;
  if (!sweep.empty()) {
    const auto colon = sweep.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--sweep-C", "expected lo:hi");
    lo = std::stod(sweep.substr(0, colon));
    hi = std::stod(sweep.substr(colon + 1));
    if (!(lo > 0 && hi > lo)) throw CLI::ValidationError("--sweep-C", "expected 0 < lo < hi");
  }
  const int n = sweep.empty() ? 1 : std::max(2, points);
  if (!as_json) std::cout << "C,F,standard_flops_per_byte,octic_flops_per_byte\n";
  for (int i = 0; i < n; ++i) {
    const double c = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    const IntensityModel m{B, c, f_ratio * c, P};
    const double s = arithmetic_intensity(m, BlockKind::Standard);
    const double o = arithmetic_intensity(m, BlockKind::Octic);
    if (as_json) {
      std::cout << json{{"C", c}, {"F", f_ratio * c}, {"standard", s}, {"octic", o}}.dump() << '\n';
    } else {
      std::cout << fmt(c) << ',' << fmt(f_ratio * c) << ',' << fmt(s) << ',' << fmt(o) << '\n';
    }
  }
  if (!sweep.empty()) {
    const Crossover x = intensity_crossover(B, P, f_ratio, lo, hi);
    if (as_json) {
      std::cout << json{{"crossover_found", x.found}, {"c_star", x.c_star}, {"relative_residual", x.relative_residual}}
                       .dump()
                << '\n';
    } else if (x.found) {
      std::cout << "# crossover C*=" << fmt(x.c_star) << " relative_residual=" << fmt(x.relative_residual)
                << " (octic intensity is higher above C*)\n";
    } else {
      std::cout << "# no crossover in [" << fmt(lo) << ", " << fmt(hi) << "]\n";
    }
  }
  return 0;
}

int cmd_bench(const BenchOptions& opt, bool as_json) {
  std::cout << header(opt.seed, "bench " + std::to_string(opt.channels) + " " + std::to_string(opt.tokens) + " " +
                                    std::to_string(opt.trials) + " " + std::to_string(opt.threads))
            << '\n';
  const BenchResult r = bench_mlp(opt);
  if (as_json) {
    std::cout << json{{"C", opt.channels},
                      {"tokens", opt.tokens},
                      {"threads", opt.threads},
                      {"trials", opt.trials},
                      {"standard_mean_us", r.standard.mean_us},
                      {"standard_std_us", r.standard.stddev_us},
                      {"standard_median_of_means_us", r.standard.median_of_means_us},
                      {"octic_mean_us", r.octic.mean_us},
                      {"octic_std_us", r.octic.stddev_us},
                      {"octic_median_of_means_us", r.octic.median_of_means_us},
                      {"linear_mac_ratio", r.linear_mac_ratio},
                      {"total_op_ratio", r.total_op_ratio}}
                     .dump()
              << '\n';
  } else {
    std::cout << "C,tokens,threads,trials,standard_mean_us,standard_std_us,octic_mean_us,octic_std_us,"
                 "linear_mac_ratio,total_op_ratio\n"
              << opt.channels << ',' << opt.tokens << ',' << opt.threads << ',' << opt.trials << ','
              << fmt(r.standard.mean_us) << ',' << fmt(r.standard.stddev_us) << ',' << fmt(r.octic.mean_us) << ','
              << fmt(r.octic.stddev_us) << ',' << fmt(r.linear_mac_ratio) << ',' << fmt(r.total_op_ratio) << '\n';
  }
  return 0;
}

struct TrainFlags {
  std::string config;
  std::string out;
  std::string checkpoint;
  std::vector<std::string> overrides;
  int threads = 0;
};

int cmd_train(const TrainFlags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.threads > 0) cfg.train.threads = f.threads;
  cfg.model.validate();
  const std::string head = reproducibility_header(cfg);
  std::cout << head << '\n';

  std::vector<Sample> pool;
  if (!cfg.manifest.empty()) pool = load_manifest(cfg.manifest);
  SyntheticOptions data = cfg.train.data;
  data.image = cfg.model.image;
  const std::vector<Sample> eval_set = cfg.eval_manifest.empty()
                                           ? synthetic_dataset(cfg.train.eval_size, data, cfg.train.data_seed + 1000003)
                                           : load_manifest(cfg.eval_manifest);
  for (const auto& s : pool) {
    if (s.label < 0 || s.label >= cfg.model.classes) throw std::runtime_error("manifest label out of range");
  }

  std::ofstream metrics;
  if (!f.out.empty()) {
    metrics.open(f.out);
    if (!metrics) throw std::runtime_error(f.out + ": cannot open for writing");
    metrics << head << "\nstep,loss,acc,rot_acc\n";
  }
  Model m = build_model(cfg.model);
  std::cout << "family=" << family_name(cfg.model.family) << " parameters=" << m.parameter_count() << '\n';
  std::cout << "step,loss,acc,rot_acc\n";
  const TrainResult result = train(m, cfg.train, pool, eval_set, [&](const MetricsRow& r) {
    std::ostringstream line;
    line << r.step << ',' << fmt(r.loss) << ',' << fmt(r.acc) << ',' << fmt(r.rot_acc) << '\n';
    std::cout << line.str() << std::flush;
    if (metrics) metrics << line.str() << std::flush;
  });
  std::cout << "# final acc=" << fmt(result.final_eval.acc) << " rot_acc=" << fmt(result.final_eval.rot_acc)
            << " max_logit_gap=" << fmt(result.final_eval.max_logit_gap)
            << " max_constraint_violation=" << fmt(result.max_constraint_violation) << '\n';
  if (!f.checkpoint.empty()) {
    save_checkpoint(f.checkpoint, m);
    std::cout << "# checkpoint " << f.checkpoint << '\n';
  }
  return 0;
}

int cmd_fourier(bool as_json) {
  std::cout << header(0, "fourier") << '\n';
  const Matrix8d q = fourier_matrix();
  const auto slots = regular_slot_order();
  if (as_json) {
    for (int i = 0; i < 8; ++i) {
      std::vector<double> row;
      for (int j = 0; j < 8; ++j) row.push_back(q(i, j));
      std::cout << json{{"slot", std::string(slots[i].name())}, {"row", row}}.dump() << '\n';
    }
    return 0;
  }
  std::cout << "# Q_reg: isotypical (columns) -> regular (rows)\nslot";
  for (int j = 0; j < 8; ++j) std::cout << ',' << iso_component_name(j);
  std::cout << '\n';
  for (int i = 0; i < 8; ++i) {
    std::cout << slots[i].name();
    for (int j = 0; j < 8; ++j) std::cout << ',' << fmt(q(i, j));
    std::cout << '\n';
  }
  return 0;
}

int cmd_dump_filters(const std::string& checkpoint, const std::string& out_dir) {
  const Model m = load_checkpoint(checkpoint);
  const auto files = dump_filters(m.params.embed, out_dir);
  std::cout << header(m.config.seed, "dump-filters " + checkpoint) << '\n'
            << "wrote " << files.size() << " files to " << out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Octic (D8) equivariant ViT kernels: verification, cost analysis and a training demo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  auto* check = app.add_subcommand("check", "Run the equivariance and algebra property suites");
  std::string scope = "all";
  std::string fault = "none";
  std::uint64_t check_seed = 0;
  int samples = 3;
  check->add_option("--scope", scope, "group, layers, model, invariants or all")->capture_default_str();
  check->add_option("--seed", check_seed)->capture_default_str();
  check->add_option("--samples", samples, "random inputs per property")->capture_default_str()->check(CLI::PositiveNumber);
  check->add_option("--inject-fault", fault, "none, rho-e-sign or unshared-e (mutation testing)")->capture_default_str();

  auto* flops = app.add_subcommand("flops", "MAC counts of standard versus octic models");
  std::string shape;
  std::string flops_config;
  std::vector<int> sweep;
  int sweep_tokens = 197;
  bool breakdown = false;
  bool flops_json = false;
  flops->add_option("--shape", shape, "vitl, vith, vitg, vite, vit22b or all");
  flops->add_option("--config", flops_config, "model config file");
  flops->add_option("--sweep", sweep, "block widths for a single-block ratio sweep")->delimiter(',');
  flops->add_option("--tokens", sweep_tokens, "tokens for --sweep")->capture_default_str();
  flops->add_flag("--breakdown", breakdown, "per-layer counts");
  flops->add_flag("--json", flops_json, "line-delimited JSON output");

  auto* intensity = app.add_subcommand("intensity", "Arithmetic intensity of standard and octic linear layers");
  double ib = 196, ip = 2, ifr = 4, ic = 1024;
  std::string isweep;
  int ipoints = 16;
  bool ijson = false;
  intensity->add_option("--B", ib, "tokens per batch")->capture_default_str();
  intensity->add_option("--P", ip, "bytes per element")->capture_default_str();
  intensity->add_option("--F-ratio", ifr, "F / C")->capture_default_str();
  intensity->add_option("--C", ic, "width when not sweeping")->capture_default_str();
  intensity->add_option("--sweep-C", isweep, "lo:hi sweep; also reports the crossover");
  intensity->add_option("--points", ipoints, "sweep points")->capture_default_str();
  intensity->add_flag("--json", ijson, "line-delimited JSON output");

  auto* bench = app.add_subcommand("bench", "Time standard versus octic MLP forward passes");
  BenchOptions bopt;
  bool bjson = false;
  bench->add_option("--C", bopt.channels)->capture_default_str();
  bench->add_option("--tokens", bopt.tokens)->capture_default_str();
  bench->add_option("--trials", bopt.trials, "at least 30")->capture_default_str();
  bench->add_option("--warmup", bopt.warmup, "at least 10")->capture_default_str();
  bench->add_option("--threads", bopt.threads, "column-split threads")->capture_default_str();
  bench->add_option("--seed", bopt.seed)->capture_default_str();
  bench->add_flag("--json", bjson, "line-delimited JSON output");

  auto* trainc = app.add_subcommand("train", "Train a toy model on synthetic shapes or a PGM/PPM manifest");
  TrainFlags tf;
  trainc->add_option("--config", tf.config, "key = value config file");
  trainc->add_option("--set", tf.overrides, "override a config key, e.g. --set model.family=i8");
  trainc->add_option("--out", tf.out, "metrics CSV path");
  trainc->add_option("--checkpoint", tf.checkpoint, "write the trained parameters here");
  trainc->add_option("--threads", tf.threads, "worker threads (default: OCTIC_THREADS or all cores)");

  auto* fourier = app.add_subcommand("fourier", "Print the D8 Fourier matrix");
  bool dump = false;
  bool fjson = false;
  fourier->add_flag("--dump", dump, "print Q_reg as CSV");
  fourier->add_flag("--json", fjson, "line-delimited JSON output");

  auto* filters = app.add_subcommand("dump-filters", "Write patch-embedding kernels as PGM images");
  std::string ckpt;
  std::string out_dir;
  filters->add_option("--checkpoint", ckpt)->required();
  filters->add_option("--out", out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*check) return cmd_check(scope, check_seed, samples, fault);
    if (*flops) {
      if (shape.empty() && flops_config.empty() && sweep.empty()) shape = "all";
      return cmd_flops(shape, flops_config, sweep, sweep_tokens, breakdown, flops_json);
    }
    if (*intensity) return cmd_intensity(ib, ip, ifr, ic, isweep, ipoints, ijson);
    if (*bench) return cmd_bench(bopt, bjson);
    if (*trainc) return cmd_train(tf);
    if (*fourier) {
      if (!dump && !fjson) throw CLI::ValidationError("fourier", "use --dump or --json");
      return cmd_fourier(fjson);
    }
    if (*filters) return cmd_dump_filters(ckpt, out_dir);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
