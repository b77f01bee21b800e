#include "colbench/cab.hpp"

#include <cmath>

namespace colbench::cab {
namespace {

constexpr double kE = 2.718281828459045235;

double safe_log(double w) { return std::log(std::max(w, 2.0)); }

// ceil with a sliver of relative slack so exact products that picked up one
// ulp of log noise (e.g. d*sqrt(C)*ln(e^10)) do not round up an extra slot.
uint64_t ceil_count(double v) {
  const double adjusted = v - std::max(1.0, std::fabs(v)) * 1e-12;
  const double c = std::ceil(adjusted);
  return c < 1.0 ? 1 : static_cast<uint64_t>(c);
}

OutcomeCounts to_counts(const BlockResult& b) {
  return OutcomeCounts{b.slots, b.empties, b.successes, b.collisions};
}

}  // namespace

const char* action_name(DiagnosisAction a) {
  switch (a) {
    case DiagnosisAction::Double: return "double";
    case DiagnosisAction::Halve: return "halve";
    case DiagnosisAction::StartRunDown: return "rundown";
  }
  return "unknown";
}

const char* range_name(Range r) {
  switch (r) {
    case Range::RockBottom: return "rock-bottom";
    case Range::Low: return "low";
    case Range::UncertainLow: return "uncertain-low";
    case Range::Good: return "good";
    case Range::UncertainHigh: return "uncertain-high";
    case Range::High: return "high";
  }
  return "unknown";
}

uint64_t sample_size(double w_cur, double C, double d) {
  return ceil_count(d * std::sqrt(C) * safe_log(w_cur));
}

SampleStats collect_sample(CabState& state, const CabParams& params, Simulator& sim) {
  state.phase = Phase::Sampling;
  const uint64_t len = sample_size(state.w_cur, sim.params().collision_cost, params.d);
  const double p = 1.0 / std::max(state.w_cur, params.min_window_floor);
  const BlockResult b =
      sim.run_fair_block(p, len, "sample", /*deactivate=*/!params.pessimistic_sampling);
  state.sample = SampleStats{b.successes, b.collisions, b.slots};
  return state.sample;
}

DiagnosisAction diagnose(const SampleStats& stats, double w_cur, double C, double d) {
  const double lw = safe_log(w_cur);
  const double succ = static_cast<double>(stats.successes);
  const double coll = static_cast<double>(stats.collisions);
  const double many_coll = d * std::sqrt(C) * lw / (8.0 * kE * kE);
  if (succ > 2.0 * d * lw / 1e5) {
    if (succ <= d * lw / (20.0 * kE)) {
      if (coll >= many_coll) return DiagnosisAction::Double;
      return DiagnosisAction::StartRunDown;
    }
    return DiagnosisAction::Double;
  }
  if (coll >= many_coll) return DiagnosisAction::Double;
  return DiagnosisAction::Halve;
}

RunDownResult run_down(double w_start, double C, double c, Simulator& sim) {
  RunDownResult res;
  const double w0 = std::max(w_start, 2.0);
  const double limit = 8.0 * std::sqrt(C) * std::log2(w0);

  double w = w0;
  while (w >= limit) {
    const uint64_t slots = ceil_count(w);
    const double p = std::min(1.0, 2.0 / w);
    res.counts.add(to_counts(sim.run_fair_block(p, slots, "rundown")));
    ++res.halving_windows;
    if (sim.should_stop()) {
      res.remaining_active = sim.active();
      return res;
    }
    w /= 2.0;
  }

  const uint64_t reps = ceil_count(c * std::log(w0));
  const uint64_t tail_slots = ceil_count(w0);
  const double p0 = std::min(1.0, 2.0 / w0);
  for (uint64_t i = 0; i < reps; ++i) {
    res.counts.add(to_counts(sim.run_fair_block(p0, tail_slots, "tail")));
    if (sim.should_stop()) break;
  }
  res.remaining_active = sim.active();
  return res;
}

uint64_t safety_cap(uint64_t n, double C) { return default_safety_cap(n, C); }

TrialResult cab_execute(uint64_t n, const ChannelParams& params, const CabParams& cab_params,
                        EngineMode engine, Rng rng, bool collect_trace) {
  SimulatorOptions opts;
  opts.engine = engine;
  opts.slot_cap = safety_cap(n, params.collision_cost);
  opts.halt_when_done = true;
  opts.collect_trace = collect_trace;
  Simulator sim(n, params, opts, rng);

  CabState state;
  state.w_cur =
      std::max(cab_params.initial_window.value_or(params.collision_cost),
               cab_params.min_window_floor);

  std::vector<std::pair<double, DiagnosisAction>> decisions;
  while (!sim.should_stop() && state.phase != Phase::Done) {
    collect_sample(state, cab_params, sim);
    if (sim.should_stop()) break;
    state.phase = Phase::Diagnosing;
    const DiagnosisAction action =
        diagnose(state.sample, state.w_cur, params.collision_cost, cab_params.d);
    decisions.emplace_back(state.w_cur, action);
    switch (action) {
      case DiagnosisAction::Double:
        state.w_cur *= 2.0;
        state.phase = Phase::Sampling;
        break;
      case DiagnosisAction::Halve:
        state.w_cur = std::max(state.w_cur / 2.0, cab_params.min_window_floor);
        state.phase = Phase::Sampling;
        break;
      case DiagnosisAction::StartRunDown: {
        state.phase = Phase::RunDownLoop;
        run_down(state.w_cur, params.collision_cost, cab_params.c, sim);
        state.phase = Phase::Done;
        break;
      }
    }
  }

  TrialResult r = finish_trial("cab", n, sim, collect_trace);
  r.decisions = std::move(decisions);
  return r;
}

Range classify_range(double w, uint64_t n, double C) {
  const double nsc = static_cast<double>(n) * std::sqrt(C);
  if (w < static_cast<double>(n)) return Range::RockBottom;
  if (w < 10.0 * nsc) return Range::Low;
  if (w < 200.0 * nsc) return Range::UncertainLow;
  if (w < 1e3 * nsc) return Range::Good;
  if (w < 1e5 * nsc) return Range::UncertainHigh;
  return Range::High;
}

}  // namespace colbench::cab
