#pragma once
#include <cstdint>

#include "colbench/rng.hpp"

namespace colbench {

// Draw from Binomial(n, p). Exact inversion for small n*p, Hormann's BTRS
// transformed-rejection sampler otherwise; both branches draw the same
// distribution, so callers never see the cutover.
uint64_t binomial_draw(Rng& rng, uint64_t n, double p);

// log of the Binomial(n, p) pmf at k, for test oracles.
double binomial_log_pmf(uint64_t n, double p, uint64_t k);

}  // namespace colbench
