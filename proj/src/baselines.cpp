#include "colbench/baselines.hpp"

#include <cmath>

namespace colbench::baselines {
namespace {

SimulatorOptions trial_options(uint64_t n, const ChannelParams& params, EngineMode engine,
                               bool collect_trace) {
  SimulatorOptions opts;
  opts.engine = engine;
  opts.slot_cap = default_safety_cap(n, params.collision_cost);
  opts.halt_when_done = true;
  opts.collect_trace = collect_trace;
  return opts;
}

}  // namespace

TrialResult beb_execute(uint64_t n, const ChannelParams& params, EngineMode engine, Rng rng,
                        bool collect_trace) {
  Simulator sim(n, params, trial_options(n, params, engine, collect_trace), rng);
  uint64_t w = 1;
  while (!sim.should_stop()) {
    sim.run_uniform_window(w, "beb");
    if (w < (uint64_t{1} << 62)) w *= 2;
  }
  return finish_trial("beb", n, sim, collect_trace);
}

TrialResult stb_execute(uint64_t n, const ChannelParams& params, EngineMode engine, Rng rng,
                        bool collect_trace) {
  Simulator sim(n, params, trial_options(n, params, engine, collect_trace), rng);
  uint64_t w_outer = 1;
  while (!sim.should_stop()) {
    for (uint64_t w = w_outer;; w /= 2) {
      sim.run_uniform_window(w, "stb");
      if (sim.should_stop() || w == 1) break;
    }
    if (w_outer < (uint64_t{1} << 62)) w_outer *= 2;
  }
  return finish_trial("stb", n, sim, collect_trace);
}

TrialResult folklore_estimate(uint64_t n, const ChannelParams& params, Rng rng) {
  SimulatorOptions opts;
  opts.engine = EngineMode::Aggregate;
  opts.slot_cap = default_safety_cap(n, params.collision_cost);
  Simulator sim(n, params, opts, rng);

  std::optional<double> estimate;
  for (int i = 0; !sim.out_of_budget(); ++i) {
    const double p = i < 1074 ? std::ldexp(1.0, -i) : 0.0;
    const BlockResult b = sim.run_fair_block(p, 1, "estimate");
    if (b.empties == 1) {
      estimate = std::ldexp(1.0, i);
      break;
    }
  }

  TrialResult r = finish_trial("folklore", n, sim, false);
  // The estimator stops at the first empty slot, not at full completion.
  r.incomplete = !estimate.has_value();
  r.estimate = estimate;
  return r;
}

}  // namespace colbench::baselines
