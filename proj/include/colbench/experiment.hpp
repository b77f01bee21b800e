#pragma once
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "colbench/cab.hpp"
#include "colbench/channel.hpp"
#include "colbench/trial.hpp"

namespace colbench::harness {

enum class Protocol { CAB, BEB, STB, Folklore };

const char* protocol_name(Protocol p);
std::optional<Protocol> protocol_from_name(const std::string& name);

struct ExperimentSpec {
  Protocol protocol = Protocol::CAB;
  std::vector<uint64_t> n_values;
  std::vector<std::string> c_values;  // expressions over n, e.g. "16" or "n^0.5"
  uint64_t seeds = 1;                 // trials per (n, C)
  uint64_t base_seed = 1;
  EngineMode engine = EngineMode::EventSkip;
  cab::CabParams cab_params;
  double kappa = 4.0;
  bool trace = false;
  std::string output_path;  // empty: results are not written to disk
};

// Throws std::invalid_argument with a description when the spec violates
// n >= 2, seeds >= 1, or 1 <= C <= n^kappa for any resolved (n, C).
void validate_spec(const ExperimentSpec& spec);

// Flat key=value text ('#' comments, lists comma-separated). Keys mirror the
// spec fields: protocol, n, C, seeds, base_seed, engine, d, c,
// initial_window, min_window_floor, pessimistic_sampling, kappa, trace, out.
ExperimentSpec parse_spec_text(const std::string& text);
ExperimentSpec load_spec_file(const std::string& path);

struct ResolvedConfig {
  uint64_t n = 0;
  double C = 1.0;
  uint64_t config_index = 0;  // RNG stream id; stable across runs
};

// Expands n_values x c_values, dropping exact duplicate (n, C) pairs.
std::vector<ResolvedConfig> resolve_configs(const ExperimentSpec& spec);

TrialResult run_single_trial(const ExperimentSpec& spec, const ResolvedConfig& config,
                             uint64_t seed_index);

// Runs every (config, seed) pair. Trials may execute on a thread pool
// (COLLISION_BENCH_THREADS caps the width); results and the incrementally
// written CSV are always ordered by (config_index, seed).
std::vector<TrialResult> run_experiment(const ExperimentSpec& spec);

extern const char kCsvHeader[];  // column names, no newline

std::string csv_row(const TrialResult& r);
void write_csv(const std::vector<TrialResult>& rows, std::ostream& out);
std::vector<TrialResult> read_csv(std::istream& in);
std::vector<TrialResult> read_csv_file(const std::string& path);

unsigned thread_count();

}  // namespace colbench::harness
