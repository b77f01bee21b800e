#include "colbench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "colbench/baselines.hpp"
#include "colbench/bounds.hpp"
#include "colbench/fit.hpp"

namespace colbench::harness {
namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      const std::string t = trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  const std::string t = trim(cur);
  if (!t.empty()) out.push_back(t);
  return out;
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    // stoull would silently wrap a negative value
    if (value.empty() || value[0] == '-') throw std::invalid_argument("negative");
    size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + value +
                                "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': expected a number, got '" + value +
                                "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = lower(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config key '" + key + "': expected a boolean, got '" + value +
                              "'");
}

std::string format_number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

const char kCsvHeader[] = "protocol,n,C,seed,makespan,collisions,collision_cost,successes,incomplete";

const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::CAB: return "cab";
    case Protocol::BEB: return "beb";
    case Protocol::STB: return "stb";
    case Protocol::Folklore: return "folklore";
  }
  return "unknown";
}

std::optional<Protocol> protocol_from_name(const std::string& name) {
  const std::string v = lower(trim(name));
  if (v == "cab") return Protocol::CAB;
  if (v == "beb") return Protocol::BEB;
  if (v == "stb" || v == "sawtooth") return Protocol::STB;
  if (v == "folklore") return Protocol::Folklore;
  return std::nullopt;
}

void validate_spec(const ExperimentSpec& spec) {
  if (spec.n_values.empty()) throw std::invalid_argument("spec: no n values");
  if (spec.c_values.empty()) throw std::invalid_argument("spec: no C values");
  if (spec.seeds == 0) throw std::invalid_argument("spec: seeds must be >= 1");
  if (spec.kappa < 0.0) throw std::invalid_argument("spec: kappa must be >= 0");
  if (spec.cab_params.d <= 0.0 || spec.cab_params.c <= 0.0)
    throw std::invalid_argument("spec: CAB constants d and c must be positive");
  if (spec.cab_params.min_window_floor < 2.0)
    throw std::invalid_argument("spec: min_window_floor must be >= 2");
  if (spec.cab_params.initial_window && *spec.cab_params.initial_window < 1.0)
    throw std::invalid_argument("spec: initial_window must be >= 1");
  for (uint64_t n : spec.n_values)
    if (n < 2) throw std::invalid_argument("spec: n must be >= 2");
  for (uint64_t n : spec.n_values) {
    for (const std::string& expr : spec.c_values) {
      double C;
      try {
        C = eval_expr(expr, static_cast<double>(n), std::nan(""));
      } catch (const std::exception& e) {
        throw std::invalid_argument("spec: bad C expression '" + expr + "': " + e.what());
      }
      if (!std::isfinite(C))
        throw std::invalid_argument("spec: C expression '" + expr +
                                    "' does not resolve to a finite number (it may not "
                                    "reference C)");
      const double limit = std::pow(static_cast<double>(n), spec.kappa);
      if (C < 1.0 || C > limit * (1.0 + 1e-9))
        throw std::invalid_argument("spec: C=" + format_number(C) + " from '" + expr +
                                    "' violates 1 <= C <= n^kappa at n=" + std::to_string(n));
    }
  }
}

ExperimentSpec parse_spec_text(const std::string& text) {
  ExperimentSpec spec;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string entry = trim(line);
    if (entry.empty()) continue;
    const size_t eq = entry.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    // Keys are case-sensitive: "C" is the cost list, "c" the CAB tail constant.
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));

    if (key == "protocol") {
      const auto p = protocol_from_name(value);
      if (!p) throw std::invalid_argument("config: unknown protocol '" + value + "'");
      spec.protocol = *p;
    } else if (key == "n") {
      spec.n_values.clear();
      for (const std::string& item : split_list(value))
        spec.n_values.push_back(parse_u64(key, item));
    } else if (key == "C" || key == "cost") {
      spec.c_values = split_list(value);
    } else if (key == "seeds") {
      spec.seeds = parse_u64(key, value);
    } else if (key == "base_seed") {
      spec.base_seed = parse_u64(key, value);
    } else if (key == "engine") {
      const auto e = engine_from_name(lower(value));
      if (!e) throw std::invalid_argument("config: unknown engine '" + value + "'");
      spec.engine = *e;
    } else if (key == "d") {
      spec.cab_params.d = parse_double(key, value);
    } else if (key == "c" || key == "tail_c") {
      spec.cab_params.c = parse_double(key, value);
    } else if (key == "initial_window") {
      spec.cab_params.initial_window = parse_double(key, value);
    } else if (key == "min_window_floor") {
      spec.cab_params.min_window_floor = parse_double(key, value);
    } else if (key == "pessimistic_sampling") {
      spec.cab_params.pessimistic_sampling = parse_bool(key, value);
    } else if (key == "kappa") {
      spec.kappa = parse_double(key, value);
    } else if (key == "trace") {
      spec.trace = parse_bool(key, value);
    } else if (key == "out") {
      spec.output_path = value;
    } else {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" +
                                  key + "'");
    }
  }
  return spec;
}

ExperimentSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open spec file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_text(buf.str());
}

std::vector<ResolvedConfig> resolve_configs(const ExperimentSpec& spec) {
  std::vector<ResolvedConfig> configs;
  for (uint64_t n : spec.n_values) {
    for (const std::string& expr : spec.c_values) {
      const double C = eval_expr(expr, static_cast<double>(n), std::nan(""));
      const bool dup = std::any_of(configs.begin(), configs.end(), [&](const ResolvedConfig& c) {
        return c.n == n && c.C == C;
      });
      if (dup) continue;
      configs.push_back(ResolvedConfig{n, C, configs.size()});
    }
  }
  return configs;
}

TrialResult run_single_trial(const ExperimentSpec& spec, const ResolvedConfig& config,
                             uint64_t seed_index) {
  const ChannelParams params{config.C, spec.kappa};
  Rng rng(spec.base_seed + seed_index, config.config_index);
  TrialResult r;
  switch (spec.protocol) {
    case Protocol::CAB:
      r = cab::cab_execute(config.n, params, spec.cab_params, spec.engine, rng, spec.trace);
      break;
    case Protocol::BEB:
      r = baselines::beb_execute(config.n, params, spec.engine, rng, spec.trace);
      break;
    case Protocol::STB:
      r = baselines::stb_execute(config.n, params, spec.engine, rng, spec.trace);
      break;
    case Protocol::Folklore:
      r = baselines::folklore_estimate(config.n, params, rng);
      break;
  }
  r.seed = spec.base_seed + seed_index;
  if (r.trace && !r.trace->empty()) {
    const bounds::TraceReport rep = bounds::analyze_trace(*r.trace, config.C);
    r.contention = ContentionSummary{rep.sum_con, rep.delta_min};
  }
  return r;
}

unsigned thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("COLLISION_BENCH_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return hw;
}

std::vector<TrialResult> run_experiment(const ExperimentSpec& spec) {
  validate_spec(spec);
  const std::vector<ResolvedConfig> configs = resolve_configs(spec);

  struct Job {
    ResolvedConfig config;
    uint64_t seed_index;
  };
  std::vector<Job> jobs;
  jobs.reserve(configs.size() * spec.seeds);
  for (const ResolvedConfig& c : configs)
    for (uint64_t s = 0; s < spec.seeds; ++s) jobs.push_back(Job{c, s});

  std::ofstream out;
  if (!spec.output_path.empty()) {
    out.open(spec.output_path);
    if (!out) throw std::invalid_argument("cannot open output file: " + spec.output_path);
    out << kCsvHeader << '\n';
  }

  std::vector<TrialResult> results(jobs.size());
  const unsigned workers = std::min<size_t>(thread_count(), jobs.size());

  if (workers <= 1) {
    for (size_t i = 0; i < jobs.size(); ++i) {
      results[i] = run_single_trial(spec, jobs[i].config, jobs[i].seed_index);
      if (out.is_open()) out << csv_row(results[i]) << '\n';  // incremental, in order
    }
    return results;
  }

  std::atomic<size_t> next{0};
  std::vector<char> done(jobs.size(), 0);
  std::mutex mu;
  std::condition_variable cv;
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      TrialResult r = run_single_trial(spec, jobs[i].config, jobs[i].seed_index);
      {
        std::lock_guard<std::mutex> lock(mu);
        results[i] = std::move(r);
        done[i] = 1;
      }
      cv.notify_all();
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  // The writer owns the output stream and emits rows strictly in job order, so
  // parallel runs are byte-identical to serial ones.
  for (size_t i = 0; i < jobs.size(); ++i) {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return done[i] != 0; });
    if (out.is_open()) out << csv_row(results[i]) << '\n';
  }
  for (std::thread& t : pool) t.join();
  return results;
}

std::string csv_row(const TrialResult& r) {
  std::ostringstream out;
  out << r.protocol << ',' << r.n << ',' << format_number(r.C) << ',' << r.seed << ','
      << r.makespan << ',' << r.collisions << ',' << format_number(r.collision_cost) << ','
      << r.successes << ',' << (r.incomplete ? 1 : 0);
  return out.str();
}

void write_csv(const std::vector<TrialResult>& rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const TrialResult& r : rows) out << csv_row(r) << '\n';
}

std::vector<TrialResult> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: empty input");
  if (trim(line) != kCsvHeader)
    throw std::invalid_argument("csv: unexpected header '" + line + "'");
  std::vector<TrialResult> rows;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split_list(line);
    if (f.size() != 9)
      throw std::invalid_argument("csv line " + std::to_string(lineno) + ": expected 9 fields");
    try {
      TrialResult r;
      r.protocol = f[0];
      r.n = std::stoull(f[1]);
      r.C = std::stod(f[2]);
      r.seed = std::stoull(f[3]);
      r.makespan = std::stoull(f[4]);
      r.collisions = std::stoull(f[5]);
      r.collision_cost = std::stod(f[6]);
      r.successes = std::stoull(f[7]);
      r.incomplete = std::stoull(f[8]) != 0;
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::invalid_argument("csv line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<TrialResult> read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open csv file: " + path);
  return read_csv(in);
}

}  // namespace colbench::harness
