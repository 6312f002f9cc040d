#include "octic/intensity.hpp"

#include <cmath>
#include <stdexcept>

namespace octic {

double arithmetic_intensity(const IntensityModel& m, BlockKind kind) {
  if (!(m.B > 0 && m.C > 0 && m.F > 0 && m.P > 0)) {
    throw std::invalid_argument("intensity parameters must be positive");
  }
  const double work = 2.0 * m.B * m.C * m.F;
  if (kind == BlockKind::Standard) return work / (m.P * (m.B * m.C + m.C * m.F + m.B * m.F));
  return (work * 3.0 / 16.0) / (m.P * (m.B * m.C + m.C * m.F / 8.0 + m.B * m.F));
}

Crossover intensity_crossover(double B, double P, double f_ratio, double c_lo, double c_hi) {
  auto gap = [&](double c) {
    const IntensityModel m{B, c, f_ratio * c, P};
    return arithmetic_intensity(m, BlockKind::Octic) - arithmetic_intensity(m, BlockKind::Standard);
  };
  Crossover r;
  double lo = c_lo;
  double hi = c_hi;
  double g_lo = gap(lo);
  if (g_lo * gap(hi) > 0) return r;
  while (r.iterations < 200 && hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = gap(mid);
    ++r.iterations;
    if (g_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((g_mid < 0) == (g_lo < 0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  r.found = true;
  r.c_star = 0.5 * (lo + hi);
  const IntensityModel m{B, r.c_star, f_ratio * r.c_star, P};
  const double s = arithmetic_intensity(m, BlockKind::Standard);
  r.relative_residual = std::abs(arithmetic_intensity(m, BlockKind::Octic) - s) / s;
  return r;
}

}  // namespace octic
