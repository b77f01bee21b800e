#include "colbench/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "colbench/rng.hpp"

namespace colbench::bounds {
namespace {

void check_probability_entries(const std::vector<double>& pv) {
  if (pv.empty()) throw std::invalid_argument("probability vector is empty");
  for (double p : pv)
    if (std::isnan(p) || p < 0.0 || p > 1.0)
      throw std::domain_error("probability entry outside [0,1]");
}

// Closed-form slot probabilities without the public length cap; analyze_trace
// needs it for arbitrarily wide slots.
SlotProbs hetero_probs_unchecked(const std::vector<double>& pv) {
  SlotProbs out;
  double empty = 1.0;
  for (double p : pv) empty *= 1.0 - p;
  double success = 0.0;
  for (size_t j = 0; j < pv.size(); ++j) {
    double term = pv[j];
    for (size_t i = 0; i < pv.size() && term != 0.0; ++i)
      if (i != j) term *= 1.0 - pv[i];
    success += term;
  }
  out.empty = empty;
  out.success = success;
  // a collision needs two senders; don't let rounding leave a residue
  size_t can_send = 0;
  for (double p : pv) can_send += p > 0.0;
  out.collision = can_send >= 2 ? std::max(0.0, 1.0 - empty - success) : 0.0;
  return out;
}

}  // namespace

double empty_prob(uint64_t m, double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) throw std::domain_error("p outside [0,1]");
  if (m == 0 || p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  return std::exp(static_cast<double>(m) * std::log1p(-p));
}

double exact_success_prob(uint64_t m, double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) throw std::domain_error("p outside [0,1]");
  if (m == 0 || p == 0.0) return 0.0;
  if (p == 1.0) return m == 1 ? 1.0 : 0.0;
  return static_cast<double>(m) * p * std::exp(static_cast<double>(m - 1) * std::log1p(-p));
}

double exact_collision_prob(uint64_t m, double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) throw std::domain_error("p outside [0,1]");
  // below two packets a collision is impossible; the subtraction would leave
  // a cancellation residue instead of an exact zero
  if (m < 2) return 0.0;
  return std::max(0.0, 1.0 - empty_prob(m, p) - exact_success_prob(m, p));
}

double collision_upper_bound(uint64_t m, double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) throw std::domain_error("p outside [0,1]");
  if (m == 0) throw std::domain_error("collision_upper_bound: m must be positive");
  const double mp = static_cast<double>(m) * p;
  if (mp >= 1.0) throw std::domain_error("collision_upper_bound requires p < 1/m");
  return 2.0 * mp * mp / (1.0 - mp);
}

double success_upper_bound(double con) {
  if (std::isnan(con) || con < 0.0) throw std::domain_error("contention must be nonnegative");
  // e * con * e^-con, written so con = 1 evaluates to exactly 1.
  return con * std::exp(1.0 - con);
}

SlotProbs hetero_slot_probs(const std::vector<double>& pv) {
  check_probability_entries(pv);
  if (pv.size() > 30) throw std::invalid_argument("closed form capped at 30 packets");
  return hetero_probs_unchecked(pv);
}

SlotProbs hetero_slot_probs_brute(const std::vector<double>& pv) {
  check_probability_entries(pv);
  if (pv.size() > 14) throw std::invalid_argument("subset enumeration capped at 14 packets");
  SlotProbs out;
  const uint32_t subsets = uint32_t{1} << pv.size();
  for (uint32_t mask = 0; mask < subsets; ++mask) {
    double prob = 1.0;
    for (size_t i = 0; i < pv.size(); ++i)
      prob *= (mask >> i) & 1u ? pv[i] : 1.0 - pv[i];
    const int senders = __builtin_popcount(mask);
    if (senders == 0)
      out.empty += prob;
    else if (senders == 1)
      out.success += prob;
    else
      out.collision += prob;
  }
  return out;
}

double contention(const std::vector<double>& pv) {
  check_probability_entries(pv);
  double sum = 0.0;
  for (double p : pv) sum += p;
  return sum;
}

double delta(const std::vector<double>& pv) {
  check_probability_entries(pv);
  double largest = 0.0, second = 0.0;
  for (double p : pv) {
    if (p > largest) {
      second = largest;
      largest = p;
    } else if (p > second) {
      second = p;
    }
  }
  if (largest == 0.0) throw std::domain_error("delta undefined for the all-zero slot");
  return second / largest;
}

double collision_lower_bound_lowcon(const std::vector<double>& pv) {
  const double con = contention(pv);
  if (con > 2.0 * (1.0 + 1e-12))
    throw std::domain_error("collision lower bound requires contention <= 2");
  double squares = 0.0;
  for (double p : pv) squares += p * p;
  return (con * con - squares) / 110.0;
}

bool check_balance_inequality(const std::vector<double>& pv) {
  const double con = contention(pv);
  double squares = 0.0;
  for (double p : pv) squares += p * p;
  const double lhs = con * con - squares;
  const double rhs = delta(pv) * con * con / 2.0;
  const double slack = 1e-12 * std::max({std::fabs(lhs), std::fabs(rhs), 1e-30});
  return lhs >= rhs - slack;
}

bool taylor_facts_check(double x) {
  if (std::isnan(x)) return false;
  // (a) 1-x <= e^-x for all x, as expm1(-x) + x >= 0.
  const double fa = std::expm1(-x) + x;
  if (fa < -4e-16 * (std::fabs(x) + 1.0)) return false;
  // (b) 1-x >= e^(-x/(1-x)) for 0 <= x < 1, as log1p(-x) + x/(1-x) >= 0.
  if (x >= 0.0 && x < 1.0) {
    const double t = x / (1.0 - x);
    const double fb = std::log1p(-x) + t;
    if (fb < -4e-16 * (t + 1.0)) return false;
  }
  // (c) 1-x >= e^-2x for 0 <= x <= 1/2, as log1p(-x) + 2x >= 0.
  if (x >= 0.0 && x <= 0.5) {
    const double fc = std::log1p(-x) + 2.0 * x;
    if (fc < -4e-16 * (2.0 * x + 1.0)) return false;
  }
  return true;
}

TraceReport analyze_trace(const ContentionTrace& trace, double C) {
  if (trace.empty()) throw std::invalid_argument("analyze_trace: empty trace");
  TraceReport rep;
  rep.delta_min = std::numeric_limits<double>::infinity();

  for (const TraceRecord& r : trace.records) {
    const double len = static_cast<double>(r.len);
    double con, slot_delta, p_coll;
    if (r.fair()) {
      con = static_cast<double>(r.m) * r.p;
      slot_delta = 1.0;  // identical nonzero probabilities tie at the maximum
      p_coll = exact_collision_prob(r.m, r.p);
    } else {
      con = contention(r.probs);
      slot_delta = delta(r.probs);
      p_coll = hetero_probs_unchecked(r.probs).collision;
    }
    rep.slots += r.len;
    rep.sum_con += con * len;
    rep.delta_min = std::min(rep.delta_min, slot_delta);
    rep.expected_collision_cost += p_coll * C * len;
    if (con <= 2.0) {
      rep.low_contention_slots += r.len;
      rep.sum_con_low += con * len;
    } else {
      rep.high_contention_slots += r.len;
    }
  }

  if (rep.low_contention_slots > 0) {
    rep.jensen_lower_bound = (rep.delta_min * C / 220.0) * rep.sum_con_low * rep.sum_con_low /
                             static_cast<double>(rep.low_contention_slots);
  }
  rep.bound_holds =
      rep.jensen_lower_bound <= rep.expected_collision_cost * (1.0 + 1e-9) + 1e-300;
  return rep;
}

namespace {

// Probabilities carry a '.' (or exponent) so a fair record's bare-integer
// m_active stays distinguishable in 3-field lines.
std::string format_prob(double p) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", p);
  std::string s(buf);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

bool is_integer_literal(const std::string& tok) {
  if (tok.empty()) return false;
  for (char ch : tok)
    if (ch < '0' || ch > '9') return false;
  return true;
}

std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

void write_trace(const ContentionTrace& trace, std::ostream& out) {
  uint64_t slot = 0;
  for (const TraceRecord& r : trace.records) {
    if (r.fair()) {
      const std::string p = format_prob(r.p);
      for (uint64_t i = 0; i < r.len; ++i, ++slot)
        out << slot << ',' << r.m << ',' << p << '\n';
    } else {
      for (uint64_t i = 0; i < r.len; ++i, ++slot) {
        out << slot;
        for (double p : r.probs) out << ',' << format_prob(p);
        out << '\n';
      }
    }
  }
}

ContentionTrace read_trace(std::istream& in) {
  ContentionTrace trace;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::vector<std::string> tok = split_record(line);
    if (tok.empty()) continue;
    try {
      if (tok.size() < 2) throw std::invalid_argument("record needs at least two fields");
      if (tok.size() == 3 && is_integer_literal(tok[1])) {
        trace.add_fair(std::stoull(tok[1]), std::stod(tok[2]));
      } else {
        std::vector<double> probs;
        probs.reserve(tok.size() - 1);
        for (size_t i = 1; i < tok.size(); ++i) probs.push_back(std::stod(tok[i]));
        check_probability_entries(probs);
        if (probs.size() == 1)
          trace.add_fair(1, probs[0]);  // single packet: dropped (not in S)
        else
          trace.add_hetero(std::move(probs));
      }
    } catch (const std::exception& e) {
      throw std::invalid_argument("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return trace;
}

ContentionTrace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open trace file: " + path);
  return read_trace(in);
}

void write_trace_file(const ContentionTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open trace file for writing: " + path);
  write_trace(trace, out);
}

namespace {

// Mixed-magnitude probability: uniform, log-uniform, or a structured edge.
double random_entry(Rng& rng) {
  const double w = rng.next_unit();
  if (w < 0.4) return rng.next_unit();
  if (w < 0.8) return std::pow(10.0, -9.0 * rng.next_unit());
  const double pick = rng.next_unit();
  if (pick < 0.25) return 0.0;
  if (pick < 0.5) return 1.0;
  if (pick < 0.75) return 0.5;
  return 1e-12;
}

std::vector<double> random_vector(Rng& rng, size_t min_len, size_t max_len) {
  const size_t len = min_len + static_cast<size_t>(rng.uniform_below(max_len - min_len + 1));
  std::vector<double> pv(len);
  for (double& p : pv) p = random_entry(rng);
  if (rng.next_unit() < 0.25 && len >= 2) pv[1] = pv[0];  // exercise ties
  bool any = false;
  for (double p : pv) any = any || p > 0.0;
  if (!any) pv[0] = 0.5;
  return pv;
}

struct SuiteRunner {
  uint64_t samples;
  uint64_t seed;
  std::vector<SuiteResult> results;

  template <typename Body>
  void run(const std::string& name, uint64_t stream, Body&& body) {
    Rng rng(seed, stream);
    SuiteResult res{name, samples, 0, std::numeric_limits<double>::infinity()};
    for (uint64_t i = 0; i < samples; ++i) {
      const double margin = body(rng);
      res.worst_margin = std::min(res.worst_margin, margin);
      if (margin < 0.0) ++res.violations;
    }
    if (!std::isfinite(res.worst_margin)) res.worst_margin = 0.0;
    results.push_back(std::move(res));
  }
};

}  // namespace

std::vector<SuiteResult> run_property_suites(uint64_t samples_per_suite, uint64_t seed) {
  SuiteRunner sr{samples_per_suite, seed, {}};

  sr.run("probability-partition", 1, [](Rng& rng) {
    const uint64_t m = 1 + rng.uniform_below(10000);
    const double p = rng.next_unit();
    const double sum = empty_prob(m, p) + exact_success_prob(m, p) + exact_collision_prob(m, p);
    return 1e-12 - std::fabs(sum - 1.0);
  });

  sr.run("collision-upper-bound", 2, [](Rng& rng) {
    const uint64_t m = 1 + rng.uniform_below(10000);
    // log-uniform over [1e-9, 1/m)
    const double hi = 1.0 / static_cast<double>(m);
    const double lo = std::min(1e-9, hi / 2.0);
    const double p = lo * std::pow(hi / lo * (1.0 - 1e-9), rng.next_unit());
    const double bound = collision_upper_bound(m, p);
    return bound - exact_collision_prob(m, p) + 1e-15 * bound;
  });

  sr.run("success-upper-bound-fair", 3, [](Rng& rng) {
    const uint64_t m = 1 + rng.uniform_below(10000);
    const double p = rng.next_unit();
    const double bound = success_upper_bound(static_cast<double>(m) * p);
    return bound - exact_success_prob(m, p) + 1e-12 * (bound + 1.0);
  });

  sr.run("success-upper-bound-hetero", 4, [](Rng& rng) {
    const std::vector<double> pv = random_vector(rng, 1, 14);
    const double bound = success_upper_bound(contention(pv));
    return bound - hetero_slot_probs(pv).success + 1e-12 * (bound + 1.0);
  });

  sr.run("collision-lower-bound-lowcon", 5, [](Rng& rng) {
    std::vector<double> pv = random_vector(rng, 2, 14);
    double con = contention(pv);
    if (con > 2.0) {
      const double scale = 2.0 / con * rng.next_unit();
      for (double& p : pv) p *= scale;
      con = contention(pv);
    }
    const double exact = hetero_slot_probs(pv).collision;
    return exact - collision_lower_bound_lowcon(pv) + 1e-15;
  });

  sr.run("balance-inequality", 6, [](Rng& rng) {
    const std::vector<double> pv = random_vector(rng, 2, 14);
    return check_balance_inequality(pv) ? 0.0 : -1.0;
  });

  sr.run("closed-vs-brute", 7, [](Rng& rng) {
    const std::vector<double> pv = random_vector(rng, 1, 14);
    const SlotProbs a = hetero_slot_probs(pv);
    const SlotProbs b = hetero_slot_probs_brute(pv);
    const double dev = std::max({std::fabs(a.empty - b.empty), std::fabs(a.success - b.success),
                                 std::fabs(a.collision - b.collision)});
    return 1e-12 - dev;
  });

  sr.run("taylor-facts", 8, [](Rng& rng) {
    const double pick = rng.next_unit();
    double x;
    if (pick < 0.3)
      x = -10.0 + 20.0 * rng.next_unit();
    else if (pick < 0.6)
      x = std::pow(10.0, -12.0 * rng.next_unit());  // cluster near 0+
    else if (pick < 0.8)
      x = rng.next_unit();  // [0,1): facts (b) and often (c)
    else
      x = std::pow(10.0, 3.0 * rng.next_unit());  // large positive
    return taylor_facts_check(x) ? 0.0 : -1.0;
  });

  return sr.results;
}

}  // namespace colbench::bounds
