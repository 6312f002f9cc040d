#pragma once

#include "octic/flops.hpp"

namespace octic {

/// A linear layer C -> F applied to B tokens, P bytes per element.
struct IntensityModel {
  double B = 196;
  double C = 1024;
  double F = 4096;
  double P = 2;
};

/// FLOPs per byte moved. Standard: 2BCF / (P (BC + CF + BF)). Octic: the
/// work shrinks by 16/3 and the weight traffic by 8,
/// (2BCF * 3/16) / (P (BC + CF/8 + BF)). Throws on non-positive inputs.
double arithmetic_intensity(const IntensityModel& m, BlockKind kind);

struct Crossover {
  bool found = false;
  double c_star = 0.0;
  double relative_residual = 0.0;  ///< |octic - standard| / standard at c_star
  int iterations = 0;
};

/// Bisection for the width where octic and standard intensities meet, with
/// F = f_ratio * C, searched in [c_lo, c_hi]. `found` is false without a
/// sign change on the bracket.
Crossover intensity_crossover(double B, double P, double f_ratio, double c_lo, double c_hi);

}  // namespace octic
