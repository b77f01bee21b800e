#include "colbench/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "colbench/binomial.hpp"

namespace colbench {
namespace {

SlotKind classify(uint64_t senders) {
  if (senders == 0) return SlotKind::Empty;
  if (senders == 1) return SlotKind::Success;
  return SlotKind::Collision;
}

void check_probability(double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0)
    throw std::domain_error("send probability outside [0,1]");
}

}  // namespace

const char* engine_name(EngineMode mode) {
  switch (mode) {
    case EngineMode::Aggregate: return "aggregate";
    case EngineMode::PerPacket: return "per-packet";
    case EngineMode::EventSkip: return "event-skip";
  }
  return "unknown";
}

std::optional<EngineMode> engine_from_name(const std::string& name) {
  if (name == "aggregate") return EngineMode::Aggregate;
  if (name == "per-packet" || name == "per_packet" || name == "perpacket")
    return EngineMode::PerPacket;
  if (name == "event-skip" || name == "event_skip" || name == "eventskip")
    return EngineMode::EventSkip;
  return std::nullopt;
}

void Metrics::record(SlotKind kind, const ChannelParams& params, const std::string& phase) {
  OutcomeCounts o;
  o.slots = 1;
  switch (kind) {
    case SlotKind::Empty: o.empties = 1; break;
    case SlotKind::Success: o.successes = 1; break;
    case SlotKind::Collision: o.collisions = 1; break;
  }
  add_block(o, params, phase);
}

void Metrics::add_block(const OutcomeCounts& block, const ChannelParams& params,
                        const std::string& phase) {
  total_slots += block.slots;
  empties += block.empties;
  successes += block.successes;
  collisions += block.collisions;
  // Recomputed from the total so the cost identity holds exactly for any C.
  collision_cost_total = static_cast<double>(collisions) * params.collision_cost;
  per_phase[phase].add(block);
}

Metrics record_outcome(Metrics metrics, const SlotOutcome& outcome, const ChannelParams& params,
                       const std::string& phase) {
  metrics.record(outcome.kind, params, phase);
  return metrics;
}

SlotOutcome step_slot_aggregate(uint64_t m_active, double p, Rng& rng) {
  check_probability(p);
  const uint64_t senders = binomial_draw(rng, m_active, p);
  return SlotOutcome{classify(senders), senders, std::nullopt};
}

SlotOutcome step_slot_per_packet(const std::vector<char>& active_flags, double p, Rng& rng) {
  check_probability(p);
  uint64_t senders = 0;
  uint64_t last = 0;
  for (size_t i = 0; i < active_flags.size(); ++i) {
    if (!active_flags[i]) continue;
    if (rng.bernoulli(p)) {
      ++senders;
      last = i;
    }
  }
  SlotOutcome out{classify(senders), senders, std::nullopt};
  if (out.kind == SlotKind::Success) out.winner = last;
  return out;
}

SkipResult skip_to_next_nonempty(uint64_t m_active, double p, uint64_t budget, Rng& rng) {
  check_probability(p);
  if (p == 0.0 || m_active == 0)
    throw std::domain_error("skip_to_next_nonempty: event probability is zero");
  if (budget == 0) return SkipResult{0, std::nullopt};

  const double log_empty = static_cast<double>(m_active) * std::log1p(-p);  // ln (1-p)^m
  const double q = -std::expm1(log_empty);                                  // 1-(1-p)^m

  uint64_t skipped = 0;
  if (q < 1.0) {
    const double g = std::log(rng.next_unit_open()) / log_empty;  // Geometric(q) via inversion
    if (g >= static_cast<double>(budget))
      return SkipResult{budget, std::nullopt};
    skipped = static_cast<uint64_t>(g);
    if (skipped >= budget) return SkipResult{budget, std::nullopt};
  }

  SlotOutcome event;
  if (p == 1.0) {
    event = SlotOutcome{classify(m_active), m_active, std::nullopt};
  } else if (m_active == 1) {
    event = SlotOutcome{SlotKind::Success, 1, std::nullopt};
  } else {
    const double p_succ =
        static_cast<double>(m_active) * p * std::exp(static_cast<double>(m_active - 1) * std::log1p(-p));
    if (rng.next_unit() * q < p_succ) {
      event = SlotOutcome{SlotKind::Success, 1, std::nullopt};
    } else {
      // Binomial(m, p) conditioned on >= 2 senders, by cumulative inversion.
      const double p_coll = std::max(q - p_succ, 1e-300);
      double u = rng.next_unit() * p_coll;
      const double ratio = p / (1.0 - p);
      uint64_t k = 2;
      double t = 0.5 * static_cast<double>(m_active) * static_cast<double>(m_active - 1) * p * p *
                 std::exp(static_cast<double>(m_active - 2) * std::log1p(-p));
      while (u > t && k < m_active) {
        u -= t;
        ++k;
        t *= ratio * static_cast<double>(m_active - k + 1) / static_cast<double>(k);
      }
      event = SlotOutcome{SlotKind::Collision, k, std::nullopt};
    }
  }
  return SkipResult{skipped, event};
}

Simulator::Simulator(uint64_t n_packets, ChannelParams params, SimulatorOptions opts, Rng rng)
    : params_(params), opts_(opts), rng_(rng), initial_(n_packets), active_count_(n_packets) {
  if (opts_.engine == EngineMode::PerPacket)
    active_flags_.assign(n_packets, 1);
}

uint64_t Simulator::budget_left() const {
  return opts_.slot_cap > metrics_.total_slots ? opts_.slot_cap - metrics_.total_slots : 0;
}

void Simulator::deactivate_one(const SlotOutcome& outcome) {
  if (active_count_ == 0) return;
  --active_count_;
  if (opts_.engine == EngineMode::PerPacket) {
    // The aggregate engines are anonymous; here the exact winner retires.
    if (outcome.winner) active_flags_[*outcome.winner] = 0;
  }
}

BlockResult Simulator::run_fair_block(double p, uint64_t slots, const std::string& phase,
                                      bool deactivate) {
  check_probability(p);
  OutcomeCounts block;
  uint64_t remaining = slots;

  auto apply = [&](const SlotOutcome& o) {
    ++block.slots;
    switch (o.kind) {
      case SlotKind::Empty: ++block.empties; break;
      case SlotKind::Success:
        ++block.successes;
        if (deactivate) deactivate_one(o);
        break;
      case SlotKind::Collision: ++block.collisions; break;
    }
  };

  while (remaining > 0) {
    if (opts_.halt_when_done && active_count_ == 0) break;
    const uint64_t used = block.slots;
    const uint64_t avail = budget_left() > used ? budget_left() - used : 0;
    if (avail == 0) {
      out_of_budget_ = true;
      break;
    }
    const uint64_t chunk = std::min(remaining, avail);

    if (active_count_ == 0 || p == 0.0) {
      block.slots += chunk;
      block.empties += chunk;
      remaining -= chunk;
      continue;
    }

    const bool skip = opts_.engine == EngineMode::EventSkip &&
                      static_cast<double>(active_count_) * p < 0.1;
    if (skip) {
      const uint64_t m = active_count_;
      SkipResult sr = skip_to_next_nonempty(m, p, chunk, rng_);
      block.slots += sr.skipped;
      block.empties += sr.skipped;
      uint64_t run_len = sr.skipped;
      if (sr.outcome) {
        apply(*sr.outcome);
        ++run_len;
      }
      if (opts_.collect_trace) trace_.add_fair(m, p, run_len);
      remaining -= std::min(remaining, run_len);
      continue;
    }

    const uint64_t m = active_count_;
    SlotOutcome o = opts_.engine == EngineMode::PerPacket
                        ? step_slot_per_packet(active_flags_, p, rng_)
                        : step_slot_aggregate(m, p, rng_);
    apply(o);
    if (opts_.collect_trace) trace_.add_fair(m, p, 1);
    --remaining;
  }

  metrics_.add_block(block, params_, phase);
  return BlockResult{block.slots, block.empties, block.successes, block.collisions};
}

BlockResult Simulator::run_uniform_window(uint64_t w_slots, const std::string& phase) {
  if (w_slots == 0) throw std::domain_error("run_uniform_window: empty window");
  OutcomeCounts block;
  const uint64_t m_start = active_count_;

  if (opts_.engine == EngineMode::PerPacket) {
    // Each active packet commits to one slot up front.
    std::vector<uint64_t> count(w_slots, 0);
    std::vector<uint64_t> lone(w_slots, 0);
    for (size_t i = 0; i < active_flags_.size(); ++i) {
      if (!active_flags_[i]) continue;
      const uint64_t s = rng_.uniform_below(w_slots);
      ++count[s];
      lone[s] = i;
    }
    for (uint64_t s = 0; s < w_slots; ++s) {
      if (opts_.halt_when_done && active_count_ == 0) break;
      if (budget_left() <= block.slots) {
        out_of_budget_ = true;
        break;
      }
      ++block.slots;
      const uint64_t k = count[s];
      if (k == 0) {
        ++block.empties;
      } else if (k == 1) {
        ++block.successes;
        SlotOutcome o{SlotKind::Success, 1, lone[s]};
        deactivate_one(o);
      } else {
        ++block.collisions;
      }
    }
  } else {
    // Occupancy of a uniform placement, drawn slot by slot: conditioned on the
    // balls not yet placed, slot s receives Binomial(r_left, 1/w_left).
    uint64_t r_left = m_start;
    uint64_t w_left = w_slots;
    for (uint64_t s = 0; s < w_slots; ++s, --w_left) {
      if (opts_.halt_when_done && active_count_ == 0) break;
      if (budget_left() <= block.slots) {
        out_of_budget_ = true;
        break;
      }
      ++block.slots;
      const uint64_t k = binomial_draw(rng_, r_left, 1.0 / static_cast<double>(w_left));
      r_left -= k;
      if (k == 0) {
        ++block.empties;
      } else if (k == 1) {
        ++block.successes;
        SlotOutcome o{SlotKind::Success, 1, std::nullopt};
        deactivate_one(o);
      } else {
        ++block.collisions;
      }
    }
  }

  if (opts_.collect_trace && block.slots > 0)
    trace_.add_fair(m_start, 1.0 / static_cast<double>(w_slots), block.slots);

  metrics_.add_block(block, params_, phase);
  return BlockResult{block.slots, block.empties, block.successes, block.collisions};
}

}  // namespace colbench
