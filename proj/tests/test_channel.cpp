#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "colbench/bounds.hpp"
#include "colbench/channel.hpp"
#include "testutil.hpp"

using namespace colbench;

TEST_CASE("aggregate slot classification at the edges") {
  Rng rng(1, 0);
  SlotOutcome o = step_slot_aggregate(0, 0.7, rng);
  CHECK(o.kind == SlotKind::Empty);
  CHECK(o.senders == 0);
  o = step_slot_aggregate(5, 0.0, rng);
  CHECK(o.kind == SlotKind::Empty);
  o = step_slot_aggregate(3, 1.0, rng);
  CHECK(o.kind == SlotKind::Collision);
  CHECK(o.senders == 3);
  CHECK_THROWS_AS(step_slot_aggregate(3, 1.5, rng), std::domain_error);
  CHECK_THROWS_AS(step_slot_aggregate(3, -0.5, rng), std::domain_error);
}

TEST_CASE("aggregate collision frequency at m=2, p=0.5") {
  Rng rng(11, 0);
  const int slots = 200000;
  int collisions = 0;
  for (int i = 0; i < slots; ++i)
    collisions += step_slot_aggregate(2, 0.5, rng).kind == SlotKind::Collision;
  // both-send probability is exactly 1/4
  const double freq = static_cast<double>(collisions) / slots;
  const double sigma = testutil::binom_sigma(slots, 0.25) / slots;
  CHECK(std::fabs(freq - 0.25) < 3.0 * sigma);
}

TEST_CASE("per-packet slot outcomes and winner reporting") {
  Rng rng(2, 0);
  std::vector<char> none = {0, 0};
  CHECK(step_slot_per_packet(none, 1.0, rng).kind == SlotKind::Empty);
  std::vector<char> lone = {1};
  SlotOutcome o = step_slot_per_packet(lone, 1.0, rng);
  CHECK(o.kind == SlotKind::Success);
  CHECK(o.senders == 1);
  CHECK(o.winner == 0);
  std::vector<char> both = {1, 1};
  o = step_slot_per_packet(both, 1.0, rng);
  CHECK(o.kind == SlotKind::Collision);
  CHECK(o.senders == 2);
  std::vector<char> second_only = {0, 1, 0};
  o = step_slot_per_packet(second_only, 1.0, rng);
  CHECK(o.winner == 1);
}

TEST_CASE("skip_to_next_nonempty edge behaviour") {
  Rng rng(3, 0);
  SkipResult sr = skip_to_next_nonempty(1, 1.0, 10, rng);
  CHECK(sr.skipped == 0);
  REQUIRE(sr.outcome.has_value());
  CHECK(sr.outcome->kind == SlotKind::Success);

  CHECK_THROWS_AS(skip_to_next_nonempty(3, 0.0, 100, rng), std::domain_error);

  // certain collision when everyone is forced to send
  sr = skip_to_next_nonempty(4, 1.0, 10, rng);
  CHECK(sr.skipped == 0);
  CHECK(sr.outcome->kind == SlotKind::Collision);
  CHECK(sr.outcome->senders == 4);
}

TEST_CASE("skip distance is Geometric(q) (chi-square)") {
  // m=2, p=0.5: nonempty probability q = 1 - 0.25 = 0.75
  Rng rng(17, 0);
  const int runs = 100000;
  const double q = 0.75;
  std::vector<uint64_t> bins(7, 0);  // 0..5 and >= 6
  for (int i = 0; i < runs; ++i) {
    SkipResult sr = skip_to_next_nonempty(2, 0.5, 1u << 20, rng);
    bins[std::min<uint64_t>(sr.skipped, 6)]++;
  }
  std::vector<double> probs(7);
  for (int k = 0; k < 6; ++k) probs[k] = q * std::pow(1.0 - q, k);
  probs[6] = std::pow(1.0 - q, 6);
  const double stat = testutil::chi2_stat(bins, probs, runs);
  const double crit = testutil::chi2_critical(6.0, testutil::kZ99);
  INFO("chi2=", stat, " crit=", crit);
  CHECK(stat < crit);
}

TEST_CASE("skip conditional outcome split matches exact slot probabilities") {
  // Given a nonempty slot at m=2, p=0.5: P(success)=0.5/0.75, P(collision)=0.25/0.75.
  Rng rng(19, 0);
  const int runs = 100000;
  int successes = 0;
  for (int i = 0; i < runs; ++i) {
    SkipResult sr = skip_to_next_nonempty(2, 0.5, 1u << 20, rng);
    successes += sr.outcome->kind == SlotKind::Success;
  }
  const double p_succ = (0.5 / 0.75);
  const double sigma = testutil::binom_sigma(runs, p_succ);
  CHECK(std::fabs(successes - runs * p_succ) < 4.0 * sigma);
}

TEST_CASE("record_outcome updates one counter and the phase map") {
  ChannelParams params{16.0, 4.0};
  Metrics m;
  m = record_outcome(m, SlotOutcome{SlotKind::Collision, 2, {}}, params, "x");
  CHECK(m.collisions == 1);
  CHECK(m.collision_cost_total == 16.0);
  m = record_outcome(m, SlotOutcome{SlotKind::Empty, 0, {}}, params, "x");
  CHECK(m.empties == 1);
  CHECK(m.collision_cost_total == 16.0);
  m = record_outcome(m, SlotOutcome{SlotKind::Success, 1, {}}, params, "y");
  CHECK(m.successes == 1);
  CHECK(m.total_slots == 3);
  CHECK(m.conserved());
  CHECK(m.per_phase.at("x").slots == 2);
  CHECK(m.per_phase.at("y").successes == 1);
}

namespace {

Simulator make_sim(uint64_t n, EngineMode engine, uint64_t seed, bool halt = false,
                   uint64_t cap = UINT64_MAX, bool trace = false) {
  SimulatorOptions opts;
  opts.engine = engine;
  opts.slot_cap = cap;
  opts.halt_when_done = halt;
  opts.collect_trace = trace;
  return Simulator(n, ChannelParams{1.0, 4.0}, opts, Rng(seed, 0));
}

}  // namespace

TEST_CASE("fair blocks conserve slot counts and respect the budget") {
  for (EngineMode engine : {EngineMode::Aggregate, EngineMode::PerPacket, EngineMode::EventSkip}) {
    Simulator sim = make_sim(16, engine, 101);
    sim.run_fair_block(0.05, 5000, "a");
    sim.run_fair_block(0.01, 5000, "b", /*deactivate=*/false);
    CHECK(sim.metrics().conserved());
    CHECK(sim.metrics().total_slots == 10000);
    CHECK(sim.active() <= 16);
  }

  Simulator capped = make_sim(4, EngineMode::EventSkip, 102, false, 1000);
  const BlockResult b = capped.run_fair_block(0.001, 5000, "a", false);
  CHECK(b.slots == 1000);
  CHECK(capped.out_of_budget());
  CHECK(capped.metrics().total_slots == 1000);
}

TEST_CASE("event-skip fills skipped empties exactly") {
  Simulator sim = make_sim(8, EngineMode::EventSkip, 103);
  const BlockResult b = sim.run_fair_block(0.001, 50000, "a", /*deactivate=*/false);
  CHECK(b.slots == 50000);
  CHECK(b.empties + b.successes + b.collisions == 50000);
  CHECK(b.empties > 40000);  // almost everything is empty at m*p = 0.008
}

TEST_CASE("halt_when_done stops at the final success") {
  Simulator sim = make_sim(2, EngineMode::Aggregate, 104, /*halt=*/true);
  while (!sim.should_stop()) sim.run_fair_block(0.5, 100, "a");
  CHECK(sim.active() == 0);
  CHECK(sim.metrics().successes == 2);
  // the last recorded slot is the final success, not a trailing empty
  CHECK(sim.metrics().total_slots >= 2);
}

TEST_CASE("identical seeds give identical metrics") {
  for (EngineMode engine : {EngineMode::Aggregate, EngineMode::PerPacket, EngineMode::EventSkip}) {
    Simulator a = make_sim(32, engine, 105);
    Simulator b = make_sim(32, engine, 105);
    for (int i = 0; i < 5; ++i) {
      a.run_fair_block(0.01, 2000, "a");
      b.run_fair_block(0.01, 2000, "a");
    }
    CHECK(a.metrics().total_slots == b.metrics().total_slots);
    CHECK(a.metrics().empties == b.metrics().empties);
    CHECK(a.metrics().successes == b.metrics().successes);
    CHECK(a.metrics().collisions == b.metrics().collisions);
    CHECK(a.active() == b.active());
    CHECK(a.rng().counter() == b.rng().counter());
  }
}

TEST_CASE("success frequency matches the exact formula within 4 sigma") {
  const uint64_t m = 6;
  const double p = 0.05;
  const double ps = bounds::exact_success_prob(m, p);
  Simulator sim = make_sim(m, EngineMode::Aggregate, 106);
  const uint64_t slots = 200000;
  const BlockResult b = sim.run_fair_block(p, slots, "a", /*deactivate=*/false);
  const double sigma = testutil::binom_sigma(static_cast<double>(slots), ps);
  CHECK(std::fabs(static_cast<double>(b.successes) - ps * slots) < 4.0 * sigma);
}

TEST_CASE("engines agree distributionally on fixed (m, p) schedules") {
  struct Cell {
    uint64_t m;
    double p;
  };
  const Cell cells[] = {{2, 0.5}, {8, 0.01}, {64, 0.01}, {200, 0.25}, {1, 0.999}};
  const uint64_t slots = 100000;
  for (const Cell& cell : cells) {
    const double ps = bounds::exact_success_prob(cell.m, cell.p);
    const double pc = bounds::exact_collision_prob(cell.m, cell.p);
    for (EngineMode engine :
         {EngineMode::Aggregate, EngineMode::PerPacket, EngineMode::EventSkip}) {
      Simulator sim = make_sim(cell.m, engine, 107);
      const BlockResult b = sim.run_fair_block(cell.p, slots, "a", /*deactivate=*/false);
      REQUIRE(b.slots == slots);
      const double s_sigma = testutil::binom_sigma(static_cast<double>(slots), ps);
      const double c_sigma = testutil::binom_sigma(static_cast<double>(slots), pc);
      INFO("m=", cell.m, " p=", cell.p, " engine=", engine_name(engine));
      CHECK(std::fabs(static_cast<double>(b.successes) - ps * slots) <
            4.0 * std::max(s_sigma, 1.0));
      CHECK(std::fabs(static_cast<double>(b.collisions) - pc * slots) <
            4.0 * std::max(c_sigma, 1.0));
    }
  }
}

TEST_CASE("uniform window: occupancy edge cases") {
  Simulator empty = make_sim(0, EngineMode::Aggregate, 108);
  BlockResult b = empty.run_uniform_window(8, "w");
  CHECK(b.empties == 8);

  Simulator one = make_sim(1, EngineMode::Aggregate, 109);
  b = one.run_uniform_window(16, "w");
  CHECK(b.successes == 1);
  CHECK(one.active() == 0);

  Simulator two = make_sim(2, EngineMode::PerPacket, 110);
  b = two.run_uniform_window(1, "w");
  CHECK(b.collisions == 1);  // both packets must pick the only slot
  CHECK(two.active() == 2);
}

TEST_CASE("uniform window occupancy matches brute-force enumeration (chi-square)") {
  // 4 balls in 4 slots: category = (successes, collisions) of the window.
  // Enumerating the 4^4 = 256 equally likely placements:
  //   (4,0): 24   (2,1): 144   (1,1): 48   (0,1): 4   (0,2): 36
  std::map<std::pair<uint64_t, uint64_t>, double> exact = {
      {{4, 0}, 24.0 / 256}, {{2, 1}, 144.0 / 256}, {{1, 1}, 48.0 / 256},
      {{0, 1}, 4.0 / 256},  {{0, 2}, 36.0 / 256}};
  for (EngineMode engine : {EngineMode::Aggregate, EngineMode::PerPacket}) {
    std::map<std::pair<uint64_t, uint64_t>, uint64_t> observed;
    const int windows = 30000;
    Rng seeder(111, engine == EngineMode::Aggregate ? 0 : 1);
    for (int i = 0; i < windows; ++i) {
      Simulator sim = make_sim(4, engine, seeder.next_u64());
      const BlockResult b = sim.run_uniform_window(4, "w");
      ++observed[{b.successes, b.collisions}];
    }
    std::vector<uint64_t> obs;
    std::vector<double> probs;
    for (const auto& [key, prob] : exact) {
      obs.push_back(observed.count(key) ? observed[key] : 0);
      probs.push_back(prob);
    }
    uint64_t covered = 0;
    for (uint64_t o : obs) covered += o;
    REQUIRE(covered == static_cast<uint64_t>(windows));  // no impossible categories
    const double stat = testutil::chi2_stat(obs, probs, windows);
    const double crit = testutil::chi2_critical(4.0, testutil::kZ999);
    INFO("engine=", engine_name(engine), " chi2=", stat, " crit=", crit);
    CHECK(stat < crit);
  }
}

TEST_CASE("contention traces merge runs and drop sub-contention slots") {
  Simulator sim = make_sim(3, EngineMode::Aggregate, 112, false, UINT64_MAX, /*trace=*/true);
  sim.run_fair_block(0.25, 50, "a", /*deactivate=*/false);
  REQUIRE(sim.trace().records.size() == 1);
  CHECK(sim.trace().records[0].m == 3);
  CHECK(sim.trace().records[0].p == 0.25);
  CHECK(sim.trace().records[0].len == 50);

  // with deactivation the record splits as m drops; m<2 slots are excluded
  Simulator live = make_sim(3, EngineMode::Aggregate, 113, false, UINT64_MAX, true);
  live.run_fair_block(0.5, 1000, "a", /*deactivate=*/true);
  uint64_t traced = live.trace().slot_count();
  CHECK(traced <= 1000);
  for (const TraceRecord& r : live.trace().records) CHECK(r.m >= 2);

  // m = 1 never enters the trace
  Simulator lone = make_sim(1, EngineMode::Aggregate, 114, false, UINT64_MAX, true);
  lone.run_fair_block(0.5, 100, "a", false);
  CHECK(lone.trace().empty());
}
