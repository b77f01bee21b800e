#pragma once
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "colbench/trace.hpp"

namespace colbench::bounds {

// Exact fair-slot probabilities for m packets each sending with probability p.
double empty_prob(uint64_t m, double p);
double exact_success_prob(uint64_t m, double p);    // m*p*(1-p)^(m-1)
double exact_collision_prob(uint64_t m, double p);  // 1 - empty - success

// Collision probability upper bound 2m^2p^2/(1-mp); requires p < 1/m.
double collision_upper_bound(uint64_t m, double p);

// Success probability upper bound e*con*e^(-con) for contention con >= 0.
double success_upper_bound(double con);

struct SlotProbs {
  double empty = 0.0;
  double success = 0.0;
  double collision = 0.0;
};

// Heterogeneous slot outcome probabilities, closed form (length <= 30).
SlotProbs hetero_slot_probs(const std::vector<double>& pv);
// Independent oracle: enumerates all 2^k send subsets (length <= 14).
SlotProbs hetero_slot_probs_brute(const std::vector<double>& pv);

double contention(const std::vector<double>& pv);  // sum of entries
// Second-largest / largest entry; 0 when only one entry is nonzero. Throws on
// the all-zero vector (such slots are excluded upstream).
double delta(const std::vector<double>& pv);

// Collision probability lower bound (Con^2 - sum p_i^2)/110; requires Con <= 2.
double collision_lower_bound_lowcon(const std::vector<double>& pv);

// Con^2 - sum p_i^2 >= delta * Con^2 / 2 (must hold for every vector with a
// nonzero entry; a tiny relative slack absorbs float rounding at exact ties).
bool check_balance_inequality(const std::vector<double>& pv);

// 1-x <= e^-x (all x); 1-x >= e^(-x/(1-x)) (0 <= x < 1); 1-x >= e^-2x
// (0 <= x <= 1/2). Checks every inequality whose domain contains x.
bool taylor_facts_check(double x);

struct TraceReport {
  uint64_t slots = 0;                  // |S|: traced slots
  double sum_con = 0.0;                // total contention over S
  double delta_min = 0.0;              // min delta over S
  uint64_t low_contention_slots = 0;   // slots with Con <= 2
  double sum_con_low = 0.0;            // contention over those slots
  uint64_t high_contention_slots = 0;  // slots with Con > 2
  // (delta_min * C / 220) * sum_con_low^2 / low_contention_slots; the
  // per-slot collision lower bound feeding it only holds for Con <= 2, so the
  // Jensen aggregation is taken over that sub-trace.
  double jensen_lower_bound = 0.0;
  double expected_collision_cost = 0.0;  // sum over S of p_collision * C
  bool bound_holds = false;              // jensen_lower_bound <= expected cost
};

// Requires a nonempty trace.
TraceReport analyze_trace(const ContentionTrace& trace, double C);

// Text trace format, one record per line:
//   slot_index,m_active,p        (fair; m_active is a bare integer)
//   slot_index,p_1,...,p_k       (heterogeneous; probabilities carry a '.')
// A 3-field line is fair iff its second token is an integer literal.
void write_trace(const ContentionTrace& trace, std::ostream& out);
ContentionTrace read_trace(std::istream& in);
ContentionTrace read_trace_file(const std::string& path);
void write_trace_file(const ContentionTrace& trace, const std::string& path);

struct SuiteResult {
  std::string name;
  uint64_t samples = 0;
  uint64_t violations = 0;
  double worst_margin = 0.0;  // most negative (bound - value) seen, 0 if none
};

// Randomized verification of every inequality above; zero violations expected.
std::vector<SuiteResult> run_property_suites(uint64_t samples_per_suite, uint64_t seed);

}  // namespace colbench::bounds
