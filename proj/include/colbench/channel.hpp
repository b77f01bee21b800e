#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "colbench/rng.hpp"
#include "colbench/trace.hpp"

namespace colbench {

enum class SlotKind { Empty, Success, Collision };

struct SlotOutcome {
  SlotKind kind = SlotKind::Empty;
  uint64_t senders = 0;
  // PerPacket engine only: index of the packet that succeeded.
  std::optional<uint64_t> winner;
};

struct ChannelParams {
  double collision_cost = 1.0;  // C, in slot-equivalents
  double kappa = 4.0;           // experiments validate C <= n^kappa
};

enum class EngineMode { Aggregate, PerPacket, EventSkip };

const char* engine_name(EngineMode mode);
std::optional<EngineMode> engine_from_name(const std::string& name);

struct OutcomeCounts {
  uint64_t slots = 0;
  uint64_t empties = 0;
  uint64_t successes = 0;
  uint64_t collisions = 0;

  void add(const OutcomeCounts& o) {
    slots += o.slots;
    empties += o.empties;
    successes += o.successes;
    collisions += o.collisions;
  }
};

struct Metrics {
  uint64_t total_slots = 0;
  uint64_t empties = 0;
  uint64_t successes = 0;
  uint64_t collisions = 0;
  double collision_cost_total = 0.0;
  std::map<std::string, OutcomeCounts> per_phase;

  void record(SlotKind kind, const ChannelParams& params, const std::string& phase);
  void add_block(const OutcomeCounts& block, const ChannelParams& params,
                 const std::string& phase);
  bool conserved() const { return empties + successes + collisions == total_slots; }
};

// Functional wrapper over Metrics::record.
Metrics record_outcome(Metrics metrics, const SlotOutcome& outcome,
                       const ChannelParams& params, const std::string& phase);

// One fair slot: senders ~ Binomial(m_active, p). Throws std::domain_error on
// p outside [0, 1].
SlotOutcome step_slot_aggregate(uint64_t m_active, double p, Rng& rng);

// Oracle engine: every active packet draws its own coin; reports the winner on
// Success so the caller can deactivate it.
SlotOutcome step_slot_per_packet(const std::vector<char>& active_flags, double p, Rng& rng);

struct SkipResult {
  uint64_t skipped = 0;  // empty slots consumed before the event (== budget if none)
  std::optional<SlotOutcome> outcome;
};

// Jumps over the empty-slot prefix of an i.i.d. fair slot sequence: skipped is
// truncated-Geometric(q), q = 1-(1-p)^m, and the event slot is drawn from the
// conditional nonempty distribution. Throws std::domain_error if p == 0.
SkipResult skip_to_next_nonempty(uint64_t m_active, double p, uint64_t budget, Rng& rng);

struct SimulatorOptions {
  EngineMode engine = EngineMode::Aggregate;
  uint64_t slot_cap = UINT64_MAX;
  bool halt_when_done = false;  // stop schedules once no packet remains active
  bool collect_trace = false;
};

struct BlockResult {
  uint64_t slots = 0;
  uint64_t empties = 0;
  uint64_t successes = 0;
  uint64_t collisions = 0;
};

// Drives one trial's channel: owns the active-packet population, the RNG, the
// metrics, and (optionally) the contention trace. Protocols consume it through
// fair blocks (Bernoulli slots) and uniform windows (one slot choice per
// packet); they never see n.
class Simulator {
 public:
  Simulator(uint64_t n_packets, ChannelParams params, SimulatorOptions opts, Rng rng);

  // Runs up to `slots` slots where every active packet sends with probability
  // p. Successes deactivate the packet unless deactivate=false (pessimistic
  // sampling). Stops early on slot-cap exhaustion or, with halt_when_done, once
  // no packet is active.
  BlockResult run_fair_block(double p, uint64_t slots, const std::string& phase,
                             bool deactivate = true);

  // One window of `w_slots` slots; each active packet sends in exactly one
  // uniformly chosen slot. Successes deactivate at the end of their slot.
  BlockResult run_uniform_window(uint64_t w_slots, const std::string& phase);

  uint64_t active() const { return active_count_; }
  uint64_t initial_packets() const { return initial_; }
  uint64_t slots_used() const { return metrics_.total_slots; }
  bool out_of_budget() const { return out_of_budget_; }
  bool should_stop() const {
    return out_of_budget_ || (opts_.halt_when_done && active_count_ == 0);
  }
  const Metrics& metrics() const { return metrics_; }
  Metrics& metrics() { return metrics_; }
  const ChannelParams& params() const { return params_; }
  const SimulatorOptions& options() const { return opts_; }
  Rng& rng() { return rng_; }
  const ContentionTrace& trace() const { return trace_; }
  ContentionTrace take_trace() { return std::move(trace_); }

 private:
  uint64_t budget_left() const;
  void deactivate_one(const SlotOutcome& outcome);

  ChannelParams params_;
  SimulatorOptions opts_;
  Rng rng_;
  uint64_t initial_;
  uint64_t active_count_;
  std::vector<char> active_flags_;  // PerPacket engine only
  Metrics metrics_;
  ContentionTrace trace_;
  bool out_of_budget_ = false;
};

}  // namespace colbench
