#pragma once
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "colbench/channel.hpp"
#include "colbench/trace.hpp"

namespace colbench {

namespace cab {
enum class DiagnosisAction : int;
}

struct ContentionSummary {
  double sum_con = 0.0;
  double delta_min = 0.0;
};

struct TrialResult {
  std::string protocol;
  uint64_t n = 0;
  double C = 1.0;
  uint64_t seed = 0;
  uint64_t makespan = 0;      // total slots
  uint64_t collisions = 0;
  double collision_cost = 0.0;
  uint64_t successes = 0;     // packets that terminated
  bool incomplete = false;
  Metrics metrics;            // includes the per-phase breakdown
  std::vector<std::pair<double, cab::DiagnosisAction>> decisions;  // (w_cur, action)
  std::optional<ContentionSummary> contention;
  std::optional<ContentionTrace> trace;
  std::optional<double> estimate;  // folklore size estimate
};

// Per-trial slot budget; exceeding it flags the trial incomplete.
inline uint64_t default_safety_cap(uint64_t n, double C) {
  const double ln_n = std::log(std::max(static_cast<double>(n), 2.0));
  const double cap = 1e6 + 1e4 * static_cast<double>(n) * std::sqrt(C) * ln_n * ln_n;
  return static_cast<uint64_t>(cap);
}

// Collects the common result fields once a protocol has finished driving sim.
inline TrialResult finish_trial(std::string protocol, uint64_t n, Simulator& sim,
                                bool take_trace) {
  TrialResult r;
  r.protocol = std::move(protocol);
  r.n = n;
  r.C = sim.params().collision_cost;
  r.makespan = sim.slots_used();
  r.collisions = sim.metrics().collisions;
  r.collision_cost = sim.metrics().collision_cost_total;
  r.successes = n - sim.active();
  r.incomplete = sim.active() != 0;
  r.metrics = sim.metrics();
  if (take_trace) r.trace = sim.take_trace();
  return r;
}

}  // namespace colbench
