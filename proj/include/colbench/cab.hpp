#pragma once
#include <cstdint>
#include <optional>

#include "colbench/channel.hpp"
#include "colbench/trial.hpp"

namespace colbench::cab {

struct CabParams {
  // Sample-size / threshold constant. The analysis only needs it "sufficiently
  // large"; 256 is calibrated so the Good range triggers RunDown in >= 99% of
  // samples at n >= 256 (smaller d leaves too much mass at zero successes).
  double d = 256.0;
  double c = 4.0;  // tail-window repetition constant, calibrated
  std::optional<double> initial_window;  // defaults to C
  double min_window_floor = 2.0;
  // When set, successes during Collect-Sample are tallied but do not
  // deactivate packets; matches the process the makespan/cost analysis uses.
  bool pessimistic_sampling = false;
};

struct SampleStats {
  uint64_t successes = 0;
  uint64_t collisions = 0;
  uint64_t sample_len = 0;
};

enum class Phase { Sampling, Diagnosing, RunDownLoop, TailWindows, Done };

// The protocol's entire view of the world: window, phase, current sample.
// Never stores or reads n.
struct CabState {
  double w_cur = 2.0;
  Phase phase = Phase::Sampling;
  SampleStats sample;
};

enum class DiagnosisAction : int { Double = 0, Halve = 1, StartRunDown = 2 };

const char* action_name(DiagnosisAction a);

// Test-harness classification of a window size against the ground-truth n.
enum class Range { RockBottom, Low, UncertainLow, Good, UncertainHigh, High };

const char* range_name(Range r);

// ceil(d * sqrt(C) * ln(w)); w below 2 is clamped to 2 so the log stays
// positive. A hair of relative slack keeps exact products (e.g. ln(e^10)=10)
// from ceiling up on 1-ulp rounding noise.
uint64_t sample_size(double w_cur, double C, double d);

// Runs one sample of sample_size slots at send probability 1/w_cur.
// Deactivation of succeeding packets follows params.pessimistic_sampling.
SampleStats collect_sample(CabState& state, const CabParams& params, Simulator& sim);

// Pure transcription of the decision tree; thresholds use ln(max(w,2)).
DiagnosisAction diagnose(const SampleStats& stats, double w_cur, double C, double d);

struct RunDownResult {
  OutcomeCounts counts;           // over both the halving run and the tail
  uint64_t halving_windows = 0;   // windows executed by the while-loop
  uint64_t remaining_active = 0;  // packets still active afterwards
};

// w0 <- w_start; windows of ceil(w) slots at probability 2/w, halving while
// w >= 8*sqrt(C)*lg(w0); then ceil(c*ln(w0)) tail windows of ceil(w0) slots at
// probability 2/w0. The schedule is fixed; the Simulator's halt_when_done
// option (used by cab_execute) cuts it short once every packet has succeeded.
RunDownResult run_down(double w_start, double C, double c, Simulator& sim);

// Per-trial slot budget before the run is declared incomplete.
uint64_t safety_cap(uint64_t n, double C);

// Full protocol: repeat {Collect-Sample; Diagnosis} until RunDown, then stop
// as soon as all n packets have succeeded (makespan = slots through the last
// success) or the safety cap is hit (incomplete).
TrialResult cab_execute(uint64_t n, const ChannelParams& params, const CabParams& cab_params,
                        EngineMode engine, Rng rng, bool collect_trace = false);

// Test-harness only: locates w against the range boundaries, which need the
// ground-truth n. Left-closed intervals.
Range classify_range(double w, uint64_t n, double C);

}  // namespace colbench::cab
