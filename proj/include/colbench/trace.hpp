#pragma once
#include <cstdint>
#include <vector>

namespace colbench {

// One run of consecutive slots sharing a send-probability profile. Fair runs
// store (m, p); heterogeneous slots store one probability per packet and have
// len == 1. probs.empty() distinguishes the two.
struct TraceRecord {
  uint64_t m = 0;
  double p = 0.0;
  uint64_t len = 1;
  std::vector<double> probs;

  bool fair() const { return probs.empty(); }
};

// Contention trace: the slots with >= 2 active packets and a nonzero send
// probability. Slots outside that set carry no contention and are dropped at
// insertion.
struct ContentionTrace {
  std::vector<TraceRecord> records;

  void add_fair(uint64_t m, double p, uint64_t len = 1) {
    if (m < 2 || p <= 0.0 || len == 0) return;
    if (!records.empty()) {
      TraceRecord& back = records.back();
      if (back.fair() && back.m == m && back.p == p) {
        back.len += len;
        return;
      }
    }
    records.push_back(TraceRecord{m, p, len, {}});
  }

  void add_hetero(std::vector<double> probs) {
    if (probs.size() < 2) return;
    int nonzero = 0;
    for (double q : probs)
      if (q > 0.0) ++nonzero;
    if (nonzero == 0) return;
    records.push_back(TraceRecord{0, 0.0, 1, std::move(probs)});
  }

  uint64_t slot_count() const {
    uint64_t total = 0;
    for (const TraceRecord& r : records) total += r.len;
    return total;
  }

  bool empty() const { return records.empty(); }
};

}  // namespace colbench
