// Independent reference implementations the tests check the library against.
// Everything here is deliberately written from the definitions, not by
// calling back into the code under test, and stays frozen: when a test
// disagrees with an oracle, the fix belongs in the library.
#ifndef SEARCHLAB_TESTS_ORACLES_H
#define SEARCHLAB_TESTS_ORACLES_H

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "searchlab/configuration.h"
#include "searchlab/game.h"
#include "searchlab/landscape.h"

namespace searchlab::oracle {

inline int hamming(const Configuration& a, const Configuration& b) {
  int d = 0;
  for (int i = 0; i < a.size(); ++i) {
    if (a.bit(i) != b.bit(i)) ++d;
  }
  return d;
}

// Table walk straight off the stored bits: own state at index bit 0, the
// j-th neighbor's state at bit j+1. Accumulation mirrors the documented
// contract (plain double sum over decisions, divided by n) so agreement can
// be demanded to exact equality.
inline double fitness(const Landscape& land, const Configuration& c) {
  double sum = 0.0;
  for (int i = 0; i < land.n(); ++i) {
    std::size_t idx = c.bit(i);
    const auto& nb = land.neighbors()[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < nb.size(); ++j) {
      idx |= static_cast<std::size_t>(c.bit(nb[j])) << (j + 1);
    }
    sum += land.contributions()[static_cast<std::size_t>(i)][idx];
  }
  return sum / land.n();
}

// Brute-force strict local optima count over all 2^n states.
inline int local_optima_count(const Landscape& land) {
  const std::uint32_t states = std::uint32_t{1} << land.n();
  int count = 0;
  for (std::uint32_t s = 0; s < states; ++s) {
    const Configuration c = Configuration::from_index(s, land.n());
    const double f = fitness(land, c);
    bool peak = true;
    for (int i = 0; i < land.n() && peak; ++i) {
      Configuration m = c;
      m.flip_bit(i);
      if (fitness(land, m) >= f) peak = false;
    }
    if (peak) ++count;
  }
  return count;
}

struct TrialMetrics {
  int distance = 0;
  bool active = false;
  double wealth = 0.0;
};

// Recomputes per-trial metrics from first principles: the reference point is
// the best-paying configuration among the start and all earlier trials,
// earliest on ties (strict improvement to displace), wealth is the plain
// running sum of submitted payoffs.
inline std::vector<TrialMetrics> run_metrics(const RunRecord& run) {
  Configuration best = run.start_config;
  double best_pay = run.start_payoff;
  double wealth = 0.0;
  std::vector<TrialMetrics> out;
  out.reserve(run.trials.size());
  for (const TrialRecord& t : run.trials) {
    const int d = oracle::hamming(t.config, best);
    wealth += t.payoff;
    out.push_back({d, d > 0, wealth});
    if (t.payoff > best_pay) {
      best_pay = t.payoff;
      best = t.config;
    }
  }
  return out;
}

// First trial index of the run's trailing all-inactive stretch, or nothing
// when the last trial is still active.
inline std::optional<int> stop_trial(const RunRecord& run) {
  const auto metrics = run_metrics(run);
  if (metrics.empty() || metrics.back().active) return std::nullopt;
  int s = static_cast<int>(metrics.size());
  while (s > 1 && !metrics[static_cast<std::size_t>(s - 2)].active) --s;
  return s;
}

// High-precision standard normal CDF, independent of the library's route:
// a long double Maclaurin series for erf on the body and the classic
// continued fraction for erfc on the tail (modified Lentz).
inline long double erf_series(long double z) {
  const long double two_over_sqrt_pi = 1.1283791670955125738961589031215451717L;
  long double term = z;
  long double sum = z;
  const long double z2 = z * z;
  for (int k = 1; k < 400; ++k) {
    term *= -z2 / k;
    const long double add = term / (2 * k + 1);
    sum += add;
    if (std::abs(add) < 1e-24L * std::abs(sum)) break;
  }
  return two_over_sqrt_pi * sum;
}

inline long double erfc_fraction(long double z) {
  // erfc(z) = e^{-z^2}/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
  const long double sqrt_pi = 1.7724538509055160272981674833411451828L;
  long double f = z;
  long double c = z;
  long double d = 0.0L;
  for (int n = 1; n <= 500; ++n) {
    const long double a = 0.5L * n;
    d = z + a * d;
    if (d == 0.0L) d = 1e-4900L;
    d = 1.0L / d;
    c = z + a / c;
    if (c == 0.0L) c = 1e-4900L;
    const long double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0L) < 1e-24L) break;
  }
  return std::exp(-z * z) / (sqrt_pi * f);
}

inline long double erfc_ld(long double z) {  // z >= 0
  return z < 3.0L ? 1.0L - erf_series(z) : erfc_fraction(z);
}

inline long double norm_cdf(double x) {
  const long double inv_sqrt2 = 0.70710678118654752440084436210484903928L;
  const long double z = static_cast<long double>(x) * inv_sqrt2;
  if (z >= 0.0L) return 1.0L - 0.5L * erfc_ld(z);
  return 0.5L * erfc_ld(-z);
}

// log of the CDF, stable arbitrarily deep into the left tail: the erfc
// continued fraction evaluated in log space.
inline long double log_norm_cdf(double x) {
  const long double inv_sqrt2 = 0.70710678118654752440084436210484903928L;
  const long double z = -static_cast<long double>(x) * inv_sqrt2;  // >= 0 on the left tail
  if (z < 3.0L) return std::log(static_cast<long double>(norm_cdf(x)));
  const long double sqrt_pi = 1.7724538509055160272981674833411451828L;
  long double f = z;
  long double c = z;
  long double d = 0.0L;
  for (int n = 1; n <= 500; ++n) {
    const long double a = 0.5L * n;
    d = z + a * d;
    if (d == 0.0L) d = 1e-4900L;
    d = 1.0L / d;
    c = z + a / c;
    if (c == 0.0L) c = 1e-4900L;
    const long double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0L) < 1e-24L) break;
  }
  return -z * z - std::log(sqrt_pi * f) - 0.69314718055994530941723212145817657L;
}

inline long double inverse_mills(double x) {
  const long double log_pdf = -0.5L * static_cast<long double>(x) * static_cast<long double>(x) -
                              0.91893853320467274178032973640561764L;  // log sqrt(2 pi)
  return std::exp(log_pdf - log_norm_cdf(x));
}

}  // namespace searchlab::oracle

#endif  // SEARCHLAB_TESTS_ORACLES_H
