#include "colbench/binomial.hpp"

#include <cmath>
#include <stdexcept>

namespace colbench {
namespace {

// Inversion by sequential search (Devroye's BINV); cheap while n*p is small.
uint64_t binv(Rng& rng, uint64_t n, double p) {
  const double q = 1.0 - p;
  const double s = p / q;
  const double a = static_cast<double>(n + 1) * s;
  const double r0 = std::exp(static_cast<double>(n) * std::log1p(-p));
  for (;;) {
    double u = rng.next_unit();
    double r = r0;
    uint64_t k = 0;
    while (u > r) {
      u -= r;
      ++k;
      if (k > n) break;  // float underflow ate the tail mass; redraw
      r *= a / static_cast<double>(k) - s;
    }
    if (k <= n) return k;
  }
}

// Hormann's BTRS transformed-rejection sampler; valid for n*p >= 10, p <= 1/2.
uint64_t btrs(Rng& rng, uint64_t n, double p) {
  const double nf = static_cast<double>(n);
  const double q = 1.0 - p;
  const double spq = std::sqrt(nf * p * q);
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = nf * p + 0.5;
  const double vr = 0.92 - 4.2 / b;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double lpq = std::log(p / q);
  const double m = std::floor((nf + 1.0) * p);
  const double h = std::lgamma(m + 1.0) + std::lgamma(nf - m + 1.0);
  for (;;) {
    const double u = rng.next_unit() - 0.5;
    const double v = rng.next_unit();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + c);
    if (kf < 0.0 || kf > nf) continue;
    if (us >= 0.07 && v <= vr) return static_cast<uint64_t>(kf);
    const double v2 = std::log(v * alpha / (a / (us * us) + b));
    if (v2 <= h - std::lgamma(kf + 1.0) - std::lgamma(nf - kf + 1.0) + (kf - m) * lpq)
      return static_cast<uint64_t>(kf);
  }
}

}  // namespace

uint64_t binomial_draw(Rng& rng, uint64_t n, double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) throw std::domain_error("binomial_draw: p outside [0,1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (p > 0.5) return n - binomial_draw(rng, n, 1.0 - p);
  if (static_cast<double>(n) * p <= 30.0) return binv(rng, n, p);
  return btrs(rng, n, p);
}

double binomial_log_pmf(uint64_t n, double p, uint64_t k) {
  if (k > n) return -INFINITY;
  if (p <= 0.0) return k == 0 ? 0.0 : -INFINITY;
  if (p >= 1.0) return k == n ? 0.0 : -INFINITY;
  const double nf = static_cast<double>(n);
  const double kf = static_cast<double>(k);
  return std::lgamma(nf + 1.0) - std::lgamma(kf + 1.0) - std::lgamma(nf - kf + 1.0) +
         kf * std::log(p) + (nf - kf) * std::log1p(-p);
}

}  // namespace colbench
