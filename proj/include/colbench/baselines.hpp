#pragma once
#include <cstdint>

#include "colbench/channel.hpp"
#include "colbench/trial.hpp"

namespace colbench::baselines {

enum class BaselineKind { BEB, STB, FolkloreEstimator };

// Binary exponential backoff: windows of 2^i slots for i = 0, 1, 2, ...; each
// active packet sends in one uniformly chosen slot per window; success
// deactivates immediately.
TrialResult beb_execute(uint64_t n, const ChannelParams& params, EngineMode engine, Rng rng,
                        bool collect_trace = false);

// Sawtooth backoff: outer window w doubles each round; the inner run sweeps
// windows of size w, w/2, ..., 1 with uniform slot choice in each.
TrialResult stb_execute(uint64_t n, const ChannelParams& params, EngineMode engine, Rng rng,
                        bool collect_trace = false);

// Folklore size estimator: slot i sends with probability 2^-i until the first
// empty slot; the estimate is 2^i at stopping. Successes deactivate; the
// estimator does not run packets to completion.
TrialResult folklore_estimate(uint64_t n, const ChannelParams& params, Rng rng);

}  // namespace colbench::baselines
