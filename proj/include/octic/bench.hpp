#pragma once

#include <cstdint>

namespace octic {

struct BenchOptions {
  int channels = 1024;
  int tokens = 16;
  int trials = 30;
  int warmup = 10;
  int threads = 1;  ///< >1 splits the token columns across threads
  std::uint64_t seed = 0;
};

struct TimingStats {
  double mean_us = 0.0;
  double stddev_us = 0.0;
  double median_of_means_us = 0.0;  ///< median over groups of 5 trials
};

struct BenchResult {
  TimingStats standard;
  TimingStats octic;
  double linear_mac_ratio = 0.0;  ///< dense / octic MACs of the two linear layers
  double total_op_ratio = 0.0;    ///< including GELU and Fourier butterflies
};

/// Forward pass of C -> 4C -> C MLPs with GELU, dense versus octic (GELU in
/// the regular domain), on a C x tokens f64 input. Throws if trials < 30 or
/// warmup < 10.
BenchResult bench_mlp(const BenchOptions& opt);

}  // namespace octic
