#include "nrc/stdnorm.hpp"

#include <cmath>

namespace nrc::stdnorm {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))
constexpr double kSeriesSwitch = 8.0;

// Partial sums of the asymptotic expansion Q(z) ~ φ(z)/z * S(z) with
// S(z) = Σ_k (-1)^k (2k-1)!!/z^{2k}. Returns S and 1-S; the latter is the
// same alternating sum started at k = 1 and avoids cancellation in h(z) - z.
void tail_series(double z, double& s, double& one_minus_s) {
  const double inv_zsq = 1.0 / (z * z);
  double term = inv_zsq;  // k = 1 term magnitude
  double sign = 1.0;
  double acc = 0.0;  // accumulates 1 - S
  double prev_mag = term;
  for (int k = 1; k < 64; ++k) {
    acc += sign * term;
    const double next = term * (2.0 * k + 1.0) * inv_zsq;
    if (next >= prev_mag || next < 1e-18) break;  // divergent tail reached or converged
    prev_mag = next;
    term = next;
    sign = -sign;
  }
  one_minus_s = acc;
  s = 1.0 - acc;
}

double log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

}  // namespace

double log_tail(double z) {
  if (z < kSeriesSwitch) {
    return std::log(0.5 * std::erfc(z * M_SQRT1_2));
  }
  double s, oms;
  tail_series(z, s, oms);
  return log_pdf(z) - std::log(z) + std::log1p(-oms);
}

double hazard(double z) {
  if (z < kSeriesSwitch) {
    return std::exp(log_pdf(z) - log_tail(z));
  }
  double s, oms;
  tail_series(z, s, oms);
  return z / s;
}

double hazard_slope(double z) {
  if (z < kSeriesSwitch) {
    const double h = hazard(z);
    return h * (h - z);
  }
  double s, oms;
  tail_series(z, s, oms);
  return z * z * oms / (s * s);
}

}  // namespace nrc::stdnorm
