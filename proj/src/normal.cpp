#include <cmath>

#include "searchlab/stats.h"

namespace searchlab {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;   // 1/sqrt(2)
constexpr double kInvSqrt2Pi = 0.3989422804014326779;  // 1/sqrt(2*pi)
constexpr double kLogSqrt2Pi = 0.9189385332046727418;  // log(sqrt(2*pi))

// Mills ratio cdf(-t)/pdf(t) for t > 0 via the Laplace continued fraction
// 1/(t + 1/(t + 2/(t + 3/(...)))), evaluated bottom-up. Converges fast for
// the t > 6 regime it is used in.
double mills_ratio_cf(double t) {
  double frac = 0.0;
  for (int k = 60; k >= 1; --k) {
    frac = k / (t + frac);
  }
  return 1.0 / (t + frac);
}

}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double log_norm_cdf(double x) {
  if (x >= -8.0) {
    return std::log(norm_cdf(x));
  }
  // Left tail: cdf(x) = pdf(x)/t * (1 - 1/t^2 + 3/t^4 - ...) with t = -x;
  // equivalently pdf(t) * mills_ratio(t).
  const double t = -x;
  return -0.5 * t * t - kLogSqrt2Pi + std::log(mills_ratio_cf(t));
}

double inverse_mills(double x) {
  if (x >= -6.0) {
    return norm_pdf(x) / norm_cdf(x);
  }
  return 1.0 / mills_ratio_cf(-x);
}

}  // namespace searchlab
